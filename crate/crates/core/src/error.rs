//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong between reading a potential and fitting a
/// decay rate. Variants carry enough context to diagnose a failure from the
/// message alone; callers that can recover match on the variant.
#[derive(Debug, Error)]
pub enum Disperse1dError {
    #[error("non-finite parameter {name} = {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositiveValue { name: &'static str, value: f64 },

    #[error("tabulated potential is empty or has fewer than 2 rows")]
    EmptyTable,

    #[error("tabulated abscissae must be strictly increasing (row {row})")]
    UnsortedTable { row: usize },

    #[error("ODE step size underflow at x = {x} for k = {k_re}+{k_im}i after {depth} bisections")]
    StepFailure {
        x: f64,
        k_re: f64,
        k_im: f64,
        depth: usize,
    },

    #[error("Wronskian drift {drift:.3e} exceeds tolerance {tol:.3e} at k = {k}")]
    WronskianDrift { k: f64, drift: f64, tol: f64 },

    #[error("transformation kernel has imaginary part {im_sup:.3e} (> {tol:.3e}); field too inaccurate")]
    NonRealKernel { im_sup: f64, tol: f64 },

    #[error("Wronskian vanishes at interior node k = {k} (|W| = {w_abs:.3e}); embedded eigenvalue or grid hits a pole")]
    InteriorZero { k: f64, w_abs: f64 },

    #[error("bound-state scan at half resolution finds {coarse} roots vs {fine}; scan step too coarse")]
    MissedRootSuspected { coarse: usize, fine: usize },

    #[error("operation requires a non-resonant potential; zero-energy classification is {class}")]
    ResonantInput { class: &'static str },

    #[error("no limit at infinity: |f(K) - f(-K)| = {jump:.3e} exceeds {tol:.3e}")]
    NoLimitAtInfinity { jump: f64, tol: f64 },

    #[error("oscillatory quadrature did not converge: {what} (best error {err:.3e}, target {tol:.3e})")]
    NoConvergence {
        what: &'static str,
        err: f64,
        tol: f64,
    },

    #[error("time t = 0 is not admissible for {what}")]
    ZeroTime { what: &'static str },

    #[error("requested size {n} exceeds supported limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("lattice Hamiltonian has omega^2 = {omega2:.6e} <= 0 at mode {mode}; mass too small for this potential")]
    NegativeFrequency { mode: usize, omega2: f64 },

    #[error("norming constant is non-finite for bound state kappa = {kappa}")]
    NonFiniteMass { kappa: f64 },

    #[error("spectral tail carries mass {mass:.3e} (> {tol:.3e}); grid too coarse for this profile")]
    SpectralLeakage { mass: f64, tol: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
