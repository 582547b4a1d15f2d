//! Jost solutions h_± of h'' ± 2ikh' = Vh, their x-derivatives, Wronskians,
//! and the transformation kernels B_±.
//!
//! The solver works on u = e^{±ikx} h_±, which satisfies u'' = (V - k^2) u.
//! For real k and for k on the positive imaginary axis the coefficient
//! q = V - k^2 is real, so each step of the fundamental 2x2 matrix is a real
//! matrix exponential. Two consequences are load-bearing downstream:
//!   - the step matrices depend on k only through k^2, so the columns for k
//!     and -k evolve conjugate launch data through identical real arithmetic
//!     and h(x,-k) = conj h(x,k) holds to roundoff, not to solver tolerance;
//!   - on the imaginary axis the wanted solution grows in the direction of
//!     integration (launched at the decaying end), which keeps the recursion
//!     stable for every kappa up to the scan cap.
//!
//! Each step uses a fourth-order two-point Magnus exponential, which is exact
//! wherever V is constant; in particular the free region beyond the cutoff
//! radius costs nothing in accuracy. Step control is doubling plus Richardson
//! extrapolation of the step matrix.

use crate::error::Disperse1dError;
use crate::grid::{Grid1d, KGrid};
use crate::potential::{Potential, Sign};
use crate::wiener::{self, WienerProfile};
use crate::Result;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

const LOCAL_TOL: f64 = 1e-11;
const MAX_DEPTH: u32 = 30;
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6

/// Fundamental-matrix step for u'' = q u over a signed step delta, built from
/// q at the two Gauss points. Exact for constant q; order four otherwise.
fn magnus(q1: f64, q2: f64, delta: f64) -> [f64; 4] {
    let qbar = 0.5 * (q1 + q2);
    let beta = (3.0f64.sqrt() / 12.0) * delta * delta * (q2 - q1);
    let sigma2 = beta * beta + qbar * delta * delta;
    let (ch, shc) = if sigma2 > 1e-8 {
        let s = sigma2.sqrt();
        (s.cosh(), s.sinh() / s)
    } else if sigma2 < -1e-8 {
        let w = (-sigma2).sqrt();
        (w.cos(), w.sin() / w)
    } else {
        // series in sigma^2 avoids the 0/0 in sinh(s)/s
        (
            1.0 + sigma2 / 2.0 + sigma2 * sigma2 / 24.0,
            1.0 + sigma2 / 6.0 + sigma2 * sigma2 / 120.0,
        )
    };
    [
        ch - shc * beta,
        shc * delta,
        shc * qbar * delta,
        ch + shc * beta,
    ]
}

fn mat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// V at the Gauss points of a grid cell and of its two halves, ascending
/// orientation. Shared by every k, which removes the dominant cost of the
/// field computation.
type CellNodes = [f64; 6];

fn gauss_pair(a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let off = (b - a) * GAUSS_OFFSET;
    (mid - off, mid + off)
}

fn cell_nodes(v: &Potential, a: f64, b: f64) -> CellNodes {
    let m = 0.5 * (a + b);
    let (c1, c2) = gauss_pair(a, b);
    let (l1, l2) = gauss_pair(a, m);
    let (r1, r2) = gauss_pair(m, b);
    [
        v.evaluate(c1),
        v.evaluate(c2),
        v.evaluate(l1),
        v.evaluate(l2),
        v.evaluate(r1),
        v.evaluate(r2),
    ]
}

/// Batched Jost solves over one x-grid: owns the per-cell V samples.
pub struct JostSolver {
    v: Potential,
    grid: Grid1d,
    cells: Vec<CellNodes>,
}

impl JostSolver {
    pub fn new(v: Potential, grid: Grid1d) -> Self {
        let cells = (0..grid.n - 1)
            .map(|i| cell_nodes(&v, grid.node(i), grid.node(i + 1)))
            .collect();
        JostSolver { v, grid, cells }
    }

    pub fn grid(&self) -> &Grid1d {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.v
    }

    fn step_adaptive(
        &self,
        nodes: Option<&CellNodes>,
        ksq: f64,
        from: f64,
        to: f64,
        tol: f64,
        depth: u32,
        k: Complex64,
    ) -> Result<[f64; 4]> {
        let mid = 0.5 * (from + to);
        let (qc, qf1, qf2) = match nodes {
            Some(c) if to > from => (
                (c[0] - ksq, c[1] - ksq),
                (c[2] - ksq, c[3] - ksq),
                (c[4] - ksq, c[5] - ksq),
            ),
            Some(c) => (
                // descending orientation: Gauss points swap within each panel
                (c[1] - ksq, c[0] - ksq),
                (c[5] - ksq, c[4] - ksq),
                (c[3] - ksq, c[2] - ksq),
            ),
            None => {
                let q = |x: f64| self.v.evaluate(x) - ksq;
                let (a, b) = gauss_pair(from, to);
                let (l1, l2) = gauss_pair(from, mid);
                let (r1, r2) = gauss_pair(mid, to);
                ((q(a), q(b)), (q(l1), q(l2)), (q(r1), q(r2)))
            }
        };
        let delta = to - from;
        let coarse = magnus(qc.0, qc.1, delta);
        let m1 = magnus(qf1.0, qf1.1, 0.5 * delta);
        let m2 = magnus(qf2.0, qf2.1, 0.5 * delta);
        let fine = mat_mul(&m2, &m1);
        let scale = fine.iter().fold(1.0f64, |s, e| s.max(e.abs()));
        let err = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (f - c).abs())
            .fold(0.0f64, f64::max);
        if err <= tol * scale {
            let mut out = fine;
            for (o, c) in out.iter_mut().zip(&coarse) {
                *o += (*o - c) / 15.0;
            }
            return Ok(out);
        }
        if depth >= MAX_DEPTH {
            return Err(Disperse1dError::StepFailure {
                x: from,
                k_re: k.re,
                k_im: k.im,
                depth: depth as usize,
            });
        }
        let first = self.step_adaptive(None, ksq, from, mid, 0.5 * tol, depth + 1, k)?;
        let second = self.step_adaptive(None, ksq, mid, to, 0.5 * tol, depth + 1, k)?;
        Ok(mat_mul(&second, &first))
    }

    /// (h, dx h) at a single node, integrating only as far as needed.
    /// Cheap enough to drive the bound-state scan.
    pub fn solve_to(&self, k: Complex64, sign: Sign, stop: usize) -> Result<(Complex64, Complex64)> {
        let ksq = (k * k).re;
        let n = self.grid.n;
        let cut = self.v.cutoff_radius();
        let i = Complex64::new(0.0, 1.0);
        match sign {
            Sign::Plus => {
                let t = (cut - self.grid.x0) / self.grid.dx;
                let i_launch = ((t - 1e-9).ceil().max(0.0) as usize).min(n - 1);
                if stop >= i_launch {
                    return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
                }
                let x_l = self.grid.node(i_launch);
                let mut u = (i * k * x_l).exp();
                let mut du = i * k * u;
                for idx in (stop..i_launch).rev() {
                    let m = self.step_adaptive(
                        Some(&self.cells[idx]),
                        ksq,
                        self.grid.node(idx + 1),
                        self.grid.node(idx),
                        LOCAL_TOL,
                        0,
                        k,
                    )?;
                    let (nu, ndu) = (m[0] * u + m[1] * du, m[2] * u + m[3] * du);
                    u = nu;
                    du = ndu;
                }
                let x = self.grid.node(stop);
                let ph = (-i * k * x).exp();
                Ok((ph * u, ph * (du - i * k * u)))
            }
            Sign::Minus => {
                let t = (-cut - self.grid.x0) / self.grid.dx;
                let i_launch = ((t + 1e-9).floor().max(0.0) as usize).min(n - 1);
                if stop <= i_launch {
                    return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
                }
                let x_l = self.grid.node(i_launch);
                let mut u = (-i * k * x_l).exp();
                let mut du = -i * k * u;
                for idx in i_launch + 1..=stop {
                    let m = self.step_adaptive(
                        Some(&self.cells[idx - 1]),
                        ksq,
                        self.grid.node(idx - 1),
                        self.grid.node(idx),
                        LOCAL_TOL,
                        0,
                        k,
                    )?;
                    let (nu, ndu) = (m[0] * u + m[1] * du, m[2] * u + m[3] * du);
                    u = nu;
                    du = ndu;
                }
                let x = self.grid.node(stop);
                let ph = (i * k * x).exp();
                Ok((ph * u, ph * (du + i * k * u)))
            }
        }
    }

    /// h and dx h on the whole grid for one wavenumber. k must be real or
    /// purely imaginary with positive imaginary part.
    pub fn solve(&self, k: Complex64, sign: Sign) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        assert!(
            k.im == 0.0 || (k.re == 0.0 && k.im > 0.0),
            "k must be real or on the positive imaginary axis"
        );
        let ksq = (k * k).re;
        let n = self.grid.n;
        let mut h = vec![Complex64::new(1.0, 0.0); n];
        let mut dh = vec![Complex64::new(0.0, 0.0); n];
        let cut = self.v.cutoff_radius();
        let i = Complex64::new(0.0, 1.0);

        match sign {
            Sign::Plus => {
                // launch at the first node past the right cutoff; exact 1
                // beyond it
                let t = (cut - self.grid.x0) / self.grid.dx;
                let i_launch = (t - 1e-9).ceil().max(0.0) as usize;
                let i_launch = i_launch.min(n - 1);
                let x_l = self.grid.node(i_launch);
                let mut u = (i * k * x_l).exp();
                let mut du = i * k * u;
                for idx in (0..i_launch).rev() {
                    let m = self.step_adaptive(
                        Some(&self.cells[idx]),
                        ksq,
                        self.grid.node(idx + 1),
                        self.grid.node(idx),
                        LOCAL_TOL,
                        0,
                        k,
                    )?;
                    let (nu, ndu) = (m[0] * u + m[1] * du, m[2] * u + m[3] * du);
                    u = nu;
                    du = ndu;
                    let x = self.grid.node(idx);
                    let ph = (-i * k * x).exp();
                    h[idx] = ph * u;
                    dh[idx] = ph * (du - i * k * u);
                }
            }
            Sign::Minus => {
                let t = (-cut - self.grid.x0) / self.grid.dx;
                let i_launch = (t + 1e-9).floor().max(0.0) as usize;
                let i_launch = i_launch.min(n - 1);
                let x_l = self.grid.node(i_launch);
                let mut u = (-i * k * x_l).exp();
                let mut du = -i * k * u;
                for idx in i_launch + 1..n {
                    let m = self.step_adaptive(
                        Some(&self.cells[idx - 1]),
                        ksq,
                        self.grid.node(idx - 1),
                        self.grid.node(idx),
                        LOCAL_TOL,
                        0,
                        k,
                    )?;
                    let (nu, ndu) = (m[0] * u + m[1] * du, m[2] * u + m[3] * du);
                    u = nu;
                    du = ndu;
                    let x = self.grid.node(idx);
                    let ph = (i * k * x).exp();
                    h[idx] = ph * u;
                    dh[idx] = ph * (du + i * k * u);
                }
            }
        }
        Ok((h, dh))
    }
}

/// One-off Jost solve; prefer JostSolver when sweeping many k.
pub fn solve_h(
    v: &Potential,
    grid: &Grid1d,
    k: Complex64,
    sign: Sign,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    JostSolver::new(v.clone(), *grid).solve(k, sign)
}

/// h_± and dx h_± sampled on the x-grid times the k-grid.
pub struct JostField {
    pub x_grid: Grid1d,
    pub k_grid: KGrid,
    /// arrays indexed [x, k]
    pub h_plus: Array2<Complex64>,
    pub h_minus: Array2<Complex64>,
    pub dh_plus: Array2<Complex64>,
    pub dh_minus: Array2<Complex64>,
}

impl JostField {
    pub fn h(&self, sign: Sign) -> &Array2<Complex64> {
        match sign {
            Sign::Plus => &self.h_plus,
            Sign::Minus => &self.h_minus,
        }
    }

    pub fn dh(&self, sign: Sign) -> &Array2<Complex64> {
        match sign {
            Sign::Plus => &self.dh_plus,
            Sign::Minus => &self.dh_minus,
        }
    }

    /// Index of -k on the k-grid; exact by grid symmetry.
    pub fn mirror_k(&self, j: usize) -> usize {
        self.k_grid.n - 1 - j
    }
}

/// Solve every k-grid column (both signs). Columns are independent and run in
/// parallel; assembly is index-ordered, so the result is deterministic.
pub fn jost_field(v: &Potential, x_grid: &Grid1d, k_grid: &KGrid) -> Result<JostField> {
    let solver = JostSolver::new(v.clone(), *x_grid);
    let n_x = x_grid.n;
    let n_k = k_grid.n;
    type Col = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);
    let cols: Result<Vec<Col>> = (0..n_k)
        .into_par_iter()
        .map(|j| {
            let k = Complex64::new(k_grid.node(j), 0.0);
            let (hp, dhp) = solver.solve(k, Sign::Plus)?;
            let (hm, dhm) = solver.solve(k, Sign::Minus)?;
            Ok((hp, dhp, hm, dhm))
        })
        .collect();
    let cols = cols?;

    let mut h_plus = Array2::default((n_x, n_k));
    let mut h_minus = Array2::default((n_x, n_k));
    let mut dh_plus = Array2::default((n_x, n_k));
    let mut dh_minus = Array2::default((n_x, n_k));
    for (j, (hp, dhp, hm, dhm)) in cols.into_iter().enumerate() {
        for i in 0..n_x {
            h_plus[(i, j)] = hp[i];
            dh_plus[(i, j)] = dhp[i];
            h_minus[(i, j)] = hm[i];
            dh_minus[(i, j)] = dhm[i];
        }
    }
    Ok(JostField {
        x_grid: *x_grid,
        k_grid: *k_grid,
        h_plus,
        h_minus,
        dh_plus,
        dh_minus,
    })
}

/// W(k), W_+(k), W_-(k) on the k-grid, evaluated at x = 0:
///   W = 2ik h_+ h_- + h_- dx h_+ - dx h_- h_+
///   W_± = h_∓(k) dx h_±(-k) - h_±(-k) dx h_∓(k)
/// The Wronskian of two solutions is x-independent; recomputing W at the
/// quarter points of the grid guards against a silently inaccurate field.
pub fn wronskians(
    field: &JostField,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let n_k = field.k_grid.n;
    let i_mid = (field.x_grid.n - 1) / 2;
    let probes = [(field.x_grid.n - 1) / 4, i_mid, 3 * (field.x_grid.n - 1) / 4];

    let w_at = |ix: usize, j: usize| -> Complex64 {
        let k = Complex64::new(field.k_grid.node(j), 0.0);
        let hp = field.h_plus[(ix, j)];
        let hm = field.h_minus[(ix, j)];
        let dhp = field.dh_plus[(ix, j)];
        let dhm = field.dh_minus[(ix, j)];
        // Wronskian of f_- and f_+ expressed through h at a general x; the
        // phases e^{±ikx} cancel
        2.0 * Complex64::new(0.0, 1.0) * k * hp * hm + hm * dhp - dhm * hp
    };

    let mut w = Vec::with_capacity(n_k);
    for j in 0..n_k {
        let samples: Vec<Complex64> = probes.iter().map(|&ix| w_at(ix, j)).collect();
        let w0 = samples[1];
        let drift = samples
            .iter()
            .map(|s| (s - w0).norm())
            .fold(0.0f64, f64::max);
        let tol = 1e-7 * w0.norm().max(1.0);
        if drift > tol {
            return Err(Disperse1dError::WronskianDrift {
                k: field.k_grid.node(j),
                drift,
                tol,
            });
        }
        w.push(w0);
    }

    let mut w_pm = [Vec::with_capacity(n_k), Vec::with_capacity(n_k)];
    for (s, out) in [Sign::Plus, Sign::Minus].into_iter().zip(w_pm.iter_mut()) {
        let (h_same, dh_same, h_opp, dh_opp) = match s {
            Sign::Plus => (&field.h_plus, &field.dh_plus, &field.h_minus, &field.dh_minus),
            Sign::Minus => (&field.h_minus, &field.dh_minus, &field.h_plus, &field.dh_plus),
        };
        for j in 0..n_k {
            let jm = field.mirror_k(j);
            let v = h_opp[(i_mid, j)] * dh_same[(i_mid, jm)]
                - h_same[(i_mid, jm)] * dh_opp[(i_mid, j)];
            out.push(v);
        }
    }
    let [wp, wm] = w_pm;
    Ok((w, wp, wm))
}

/// Transformation kernel B_±(x, ·) on its support half-line, recovered from
/// the tail-completed profile of h_±(x,·) - 1 via B_+(x,y) = 2 ghat(2y) for
/// y >= 0 and B_-(x,y) = 2 ghat(-2y) for y <= 0.
pub struct BKernel {
    /// y nodes, ascending; nonnegative for sign +, nonpositive for sign -
    pub y: Vec<f64>,
    pub b: Vec<f64>,
    /// x-derivative of the kernel on the same nodes, from the dx h profile
    pub db_dx: Vec<f64>,
    /// sup of the imaginary residual discarded from b
    pub im_sup: f64,
    pub profile: WienerProfile,
}

pub fn b_kernel(field: &JostField, x_index: usize, sign: Sign) -> Result<BKernel> {
    let n_k = field.k_grid.n;
    let one = Complex64::new(1.0, 0.0);
    let f: Vec<Complex64> = (0..n_k).map(|j| field.h(sign)[(x_index, j)] - one).collect();
    let df: Vec<Complex64> = (0..n_k).map(|j| field.dh(sign)[(x_index, j)]).collect();
    let profile = wiener::to_profile_zero_c(&field.k_grid, &f)?;
    let dprofile = wiener::to_profile_zero_c(&field.k_grid, &df)?;

    let m_len = profile.hat.len();
    let half = m_len / 2;
    // p >= 0 indices map to the support half-line of either sign
    let mut y = Vec::with_capacity(m_len - half);
    let mut b = Vec::with_capacity(m_len - half);
    let mut db = Vec::with_capacity(m_len - half);
    let mut im_sup = 0.0f64;
    for m in half..m_len {
        let p = profile.p_node(m);
        let val = 2.0 * profile.hat[m];
        let dval = 2.0 * dprofile.hat[m];
        im_sup = im_sup.max(val.im.abs()).max(dval.im.abs());
        match sign {
            Sign::Plus => {
                y.push(0.5 * p);
                b.push(val.re);
                db.push(dval.re);
            }
            Sign::Minus => {
                y.push(-0.5 * p);
                b.push(val.re);
                db.push(dval.re);
            }
        }
    }
    if sign == Sign::Minus {
        // ascending y
        y.reverse();
        b.reverse();
        db.reverse();
    }
    if im_sup >= 1e-6 {
        return Err(Disperse1dError::NonRealKernel { im_sup, tol: 1e-6 });
    }
    Ok(BKernel {
        y,
        b,
        db_dx: db,
        im_sup,
        profile,
    })
}
