//! Uniform grids in position and momentum.
//!
//! Everything downstream assumes uniform spacing: the Jost solver steps node
//! to node, Fourier profiles come from FFTs over the momentum grid, and the
//! kernel exports slice position windows out of one master grid. Keeping the
//! grid types dumb (origin, spacing, count) makes those invariants checkable
//! at construction instead of at use.

use crate::error::Disperse1dError;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Uniform position grid: nodes x_i = x0 + i*dx for i in 0..n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid1d {
    /// Grid covering [x0, x0 + (n-1) dx].
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Disperse1dError::NonFiniteParameter {
                name: "x0",
                value: x0,
            });
        }
        if !dx.is_finite() || dx <= 0.0 {
            return Err(Disperse1dError::NonPositiveValue {
                name: "dx",
                value: dx,
            });
        }
        if n < 2 {
            return Err(Disperse1dError::TooLarge {
                what: "grid node count (need >= 2)",
                n,
                limit: usize::MAX,
            });
        }
        Ok(Grid1d { x0, dx, n })
    }

    /// Symmetric grid on [-half_width, half_width] with n nodes (n odd keeps
    /// x = 0 a node, which the scattering and kernel code relies on).
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Disperse1dError::TooLarge {
                what: "symmetric grid node count (need odd >= 3)",
                n,
                limit: usize::MAX,
            });
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Disperse1dError::NonPositiveValue {
                name: "half_width",
                value: half_width,
            });
        }
        let dx = 2.0 * half_width / (n - 1) as f64;
        Ok(Grid1d {
            x0: -half_width,
            dx,
            n,
        })
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn last(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node nearest to x. x must lie within half a step of the
    /// covered interval.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x0) / self.dx;
        let i = t.round();
        if i < -0.5 || i > (self.n - 1) as f64 + 0.5 {
            return None;
        }
        let i = i.max(0.0) as usize;
        let i = i.min(self.n - 1);
        // reject x that is not actually close to a node
        if (x - self.node(i)).abs() > 0.5 * self.dx + 1e-12 * self.dx {
            return None;
        }
        Some(i)
    }

    /// Strided window: every `stride`-th node with |x| <= half_width.
    /// Returns the selected master-grid indices and the window as a grid of
    /// its own. Requires that half_width and stride line up with the nodes.
    pub fn strided_window(&self, half_width: f64, stride: usize) -> Result<(Vec<usize>, Grid1d)> {
        if stride == 0 {
            return Err(Disperse1dError::NonPositiveValue {
                name: "stride",
                value: 0.0,
            });
        }
        let lo = self
            .index_of(-half_width)
            .ok_or(Disperse1dError::NonFiniteParameter {
                name: "window half_width (not on grid)",
                value: half_width,
            })?;
        let hi = self
            .index_of(half_width)
            .ok_or(Disperse1dError::NonFiniteParameter {
                name: "window half_width (not on grid)",
                value: half_width,
            })?;
        let idx: Vec<usize> = (lo..=hi).step_by(stride).collect();
        if *idx.last().unwrap() != hi {
            return Err(Disperse1dError::NonFiniteParameter {
                name: "window stride (does not divide node span)",
                value: stride as f64,
            });
        }
        let sub = Grid1d::new(self.node(lo), self.dx * stride as f64, idx.len())?;
        Ok((idx, sub))
    }
}

/// Symmetric momentum grid: k_j = -k_max + j*dk, j in 0..n, with n odd so
/// k = 0 is the center node. Fourier profiles use the zero-padded length
/// 4*(n-1), which pushes periodic images of the p-domain out by a factor 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub k_max: f64,
    pub n: usize,
}

impl KGrid {
    pub fn new(k_max: f64, n: usize) -> Result<Self> {
        if !k_max.is_finite() || k_max <= 0.0 {
            return Err(Disperse1dError::NonPositiveValue {
                name: "k_max",
                value: k_max,
            });
        }
        if n < 5 || n % 2 == 0 {
            return Err(Disperse1dError::TooLarge {
                what: "momentum grid node count (need odd >= 5)",
                n,
                limit: usize::MAX,
            });
        }
        Ok(KGrid { k_max, n })
    }

    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * self.k_max / (self.n - 1) as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -self.k_max + self.dk() * j as f64
    }

    /// Index of the k = 0 node.
    #[inline]
    pub fn zero_index(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// FFT length used for profile transforms (zero padding x4).
    #[inline]
    pub fn padded_len(&self) -> usize {
        4 * (self.n - 1)
    }

    /// Spacing of the conjugate p grid under the padded transform.
    #[inline]
    pub fn dp(&self) -> f64 {
        std::f64::consts::TAU / (self.padded_len() as f64 * self.dk())
    }

    /// Node m of the conjugate p grid: p_m = (m - M/2) dp for m in
    /// 0..padded_len(). Symmetric about p = 0, which is itself a node.
    #[inline]
    pub fn p_node(&self, m: usize) -> f64 {
        (m as f64 - (self.padded_len() / 2) as f64) * self.dp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_grid_centers_zero() {
        let g = Grid1d::symmetric(45.0, 901).unwrap();
        assert_eq!(g.n, 901);
        assert_relative_eq!(g.dx, 0.1, max_relative = 1e-15);
        assert_relative_eq!(g.node(450), 0.0, epsilon = 1e-13);
        assert_relative_eq!(g.last(), 45.0, epsilon = 1e-12);
        assert_eq!(g.index_of(0.0), Some(450));
        assert_eq!(g.index_of(-45.0), Some(0));
        assert_eq!(g.index_of(45.05001), None);
    }

    #[test]
    fn strided_window_slices_exactly() {
        let g = Grid1d::symmetric(45.0, 901).unwrap();
        let (idx, sub) = g.strided_window(20.0, 2).unwrap();
        assert_eq!(idx.len(), 201);
        assert_eq!(sub.n, 201);
        assert_relative_eq!(sub.x0, -20.0, epsilon = 1e-12);
        assert_relative_eq!(sub.dx, 0.2, epsilon = 1e-15);
        let (idx5, sub5) = g.strided_window(45.0, 5).unwrap();
        assert_eq!(idx5.len(), 181);
        assert_relative_eq!(sub5.dx, 0.5, epsilon = 1e-15);
        assert_relative_eq!(sub5.node(90), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kgrid_matches_design_numbers() {
        let kg = KGrid::new(40.0, 4097).unwrap();
        assert_relative_eq!(kg.dk(), 80.0 / 4096.0, max_relative = 1e-15);
        assert_eq!(kg.zero_index(), 2048);
        assert_relative_eq!(kg.node(2048), 0.0, epsilon = 1e-13);
        assert_eq!(kg.padded_len(), 16384);
        // dp = 2 pi / (16384 * dk) = 2 pi / 320
        assert_relative_eq!(kg.dp(), std::f64::consts::TAU / 320.0, max_relative = 1e-14);
        // p grid is symmetric with p = 0 at the center node
        assert_relative_eq!(kg.p_node(8192), 0.0, epsilon = 1e-15);
        assert_relative_eq!(kg.p_node(0), -8192.0 * kg.dp(), max_relative = 1e-14);
        assert_relative_eq!(kg.p_node(16383), 8191.0 * kg.dp(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_even_counts_and_bad_spacing() {
        assert!(Grid1d::symmetric(10.0, 100).is_err());
        assert!(KGrid::new(40.0, 4096).is_err());
        assert!(Grid1d::new(0.0, -0.1, 10).is_err());
        assert!(Grid1d::new(f64::NAN, 0.1, 10).is_err());
    }
}
