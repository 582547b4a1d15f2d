//! Scattering data and dispersive decay for one-dimensional Schrodinger and
//! Klein-Gordon equations with short-range potentials.
//!
//! The crate computes Jost solutions and scattering data for -u'' + V u on the
//! line, classifies the zero-energy behaviour (resonant vs non-resonant),
//! evaluates the time propagators e^{-itH} P_c and the Klein-Gordon group
//! through kernel representations, and verifies the t^{-1/2} and t^{-3/2}
//! decay rates against an independent finite-difference oracle.
//!
//! Modules are layered bottom-up: grids and potentials, quadrature and FFT
//! plumbing, the Jost ODE solver, scattering data, Fourier profiles in the
//! Wiener algebra, oscillatory integrals, the propagator kernels, the lattice
//! oracle, and the decay-fit analysis on top.

pub mod error;
pub mod grid;
pub mod jost;
pub mod scattering;
pub mod potential;
pub mod quad;
pub mod fft;
pub mod wiener;

pub use error::Disperse1dError;
pub use grid::{Grid1d, KGrid};
pub use potential::Potential;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Disperse1dError>;
