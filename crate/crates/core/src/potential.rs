//! Potential families and their weighted moment norms.
//!
//! Every propagator bound downstream is phrased in terms of the norms
//! ||V||_{L1_n} = integral of (1+|x|)^n |V| and the one-sided tail moments
//! eta, gamma, so those are computed here once, reproducibly, by adaptive
//! quadrature (trapezoid on the native grid for tabulated input).
//!
//! A potential carries a cutoff radius beyond which it is treated as exactly
//! zero: the smallest half-integer L with eta_+(L) + eta_-(-L) below
//! 1e-12 * (1 + ||V||_L1). Launching the Jost integration there makes the
//! asymptotic normalization h = 1 exact to working precision.

use crate::error::Disperse1dError;
use crate::quad;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::io::Read;

const CUTOFF_TOL: f64 = 1e-12;
const CUTOFF_STEP: f64 = 0.5;
const CUTOFF_MAX: f64 = 200.0;

/// Parametric families plus tabulated input. All built-in families are even
/// in x; tabulated data may not be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Zero,
    /// V(x) = -depth * exp(-(x/width)^2)
    GaussianWell { depth: f64, width: f64 },
    /// V(x) = -lambda (lambda+1) sech^2(x), the Poschl-Teller family
    Sech2 { lambda: f64 },
    /// V(x) = -depth on |x| <= halfwidth, 0 outside
    SquareWell { depth: f64, halfwidth: f64 },
    /// V(x) = amplitude * exp(-|x|/scale)
    ExpDecay { amplitude: f64, scale: f64 },
    /// piecewise-linear interpolation of (x, V) samples, zero outside
    Tabulated { xs: Vec<f64>, vs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    family: Family,
    cutoff_radius: f64,
    l1_norm: f64,
}

impl Potential {
    pub fn new(family: Family) -> Result<Self> {
        validate(&family)?;
        let l1_norm = l1_closed_form(&family);
        let cutoff_radius = cutoff_radius(&family, l1_norm);
        Ok(Potential {
            family,
            cutoff_radius,
            l1_norm,
        })
    }

    pub fn zero() -> Self {
        Potential::new(Family::Zero).unwrap()
    }

    pub fn gaussian_well(depth: f64, width: f64) -> Result<Self> {
        Potential::new(Family::GaussianWell { depth, width })
    }

    pub fn sech2(lambda: f64) -> Result<Self> {
        Potential::new(Family::Sech2 { lambda })
    }

    pub fn square_well(depth: f64, halfwidth: f64) -> Result<Self> {
        Potential::new(Family::SquareWell { depth, halfwidth })
    }

    pub fn exp_decay(amplitude: f64, scale: f64) -> Result<Self> {
        Potential::new(Family::ExpDecay { amplitude, scale })
    }

    pub fn tabulated(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        Potential::new(Family::Tabulated { xs, vs })
    }

    /// Load a tabulated potential from two-column CSV with header `x,V`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Disperse1dError::Parse {
                line: i + 2,
                msg: e.to_string(),
            })?;
            if rec.len() < 2 {
                return Err(Disperse1dError::Parse {
                    line: i + 2,
                    msg: "expected two columns x,V".into(),
                });
            }
            let x: f64 = rec[0].trim().parse().map_err(|_| Disperse1dError::Parse {
                line: i + 2,
                msg: format!("bad x value {:?}", &rec[0]),
            })?;
            let v: f64 = rec[1].trim().parse().map_err(|_| Disperse1dError::Parse {
                line: i + 2,
                msg: format!("bad V value {:?}", &rec[1]),
            })?;
            xs.push(x);
            vs.push(v);
        }
        Potential::tabulated(xs, vs)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// Evaluate V(x); exactly 0 beyond the cutoff radius.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x.abs() > self.cutoff_radius {
            return 0.0;
        }
        eval_raw(&self.family, x)
    }

    /// The deepest value of V, used to cap bound-state scans.
    pub fn min_value(&self) -> f64 {
        match &self.family {
            Family::Zero => 0.0,
            Family::GaussianWell { depth, .. } => -depth,
            Family::Sech2 { lambda } => -lambda * (lambda + 1.0),
            Family::SquareWell { depth, .. } => -depth,
            Family::ExpDecay { amplitude, .. } => amplitude.min(0.0),
            Family::Tabulated { vs, .. } => vs.iter().copied().fold(0.0, f64::min),
        }
    }

    /// ||V||_{L1_n} = integral of (1+|x|)^n |V(x)| dx for n in {0,1,2}.
    pub fn moment_norm(&self, n: u32) -> Result<f64> {
        if n > 2 {
            return Err(Disperse1dError::TooLarge {
                what: "moment order (need n <= 2)",
                n: n as usize,
                limit: 2,
            });
        }
        if let Family::Zero = self.family {
            return Ok(0.0);
        }
        if let Family::Tabulated { xs, vs } = &self.family {
            let w: Vec<f64> = xs
                .iter()
                .zip(vs)
                .map(|(&x, &v)| (1.0 + x.abs()).powi(n as i32) * v.abs())
                .collect();
            return Ok(quad::trapezoid_graded(xs, &w));
        }
        let c = self.cutoff_radius;
        let fam = self.family.clone();
        quad::adaptive_split(
            &mut |x: f64| (1.0 + x.abs()).powi(n as i32) * eval_raw(&fam, x).abs(),
            -c,
            c,
            &[0.0],
            1e-12,
            0.0,
        )
    }

    /// One-sided tail moments at x:
    /// eta_+(x) = integral_x^inf |V|, gamma_+(x) = integral_x^inf (y-x)|V(y)| dy
    /// (mirrored for the minus sign). Both vanish once x passes the cutoff.
    pub fn tail_moments(&self, x: f64, sign: Sign) -> (f64, f64) {
        let c = self.cutoff_radius;
        match &self.family {
            Family::Zero => (0.0, 0.0),
            Family::Tabulated { xs, vs } => tabulated_tails(xs, vs, x, sign),
            fam => {
                let (a, b) = match sign {
                    Sign::Plus => (x, c),
                    Sign::Minus => (-c, x),
                };
                if a >= b {
                    return (0.0, 0.0);
                }
                let eta = quad::adaptive_split(
                    &mut |y: f64| eval_raw(fam, y).abs(),
                    a,
                    b,
                    &[0.0],
                    1e-13,
                    0.0,
                )
                .unwrap_or(0.0);
                let gamma = quad::adaptive_split(
                    &mut |y: f64| (y - x).abs() * eval_raw(fam, y).abs(),
                    a,
                    b,
                    &[0.0],
                    1e-13,
                    0.0,
                )
                .unwrap_or(0.0);
                (eta, gamma)
            }
        }
    }

    /// Canonical identity string; feeds file cache keys.
    pub fn canonical_id(&self) -> String {
        match &self.family {
            Family::Zero => "zero".into(),
            Family::GaussianWell { depth, width } => {
                format!("gaussian_well;depth={depth:.17e};width={width:.17e}")
            }
            Family::Sech2 { lambda } => format!("sech2;lambda={lambda:.17e}"),
            Family::SquareWell { depth, halfwidth } => {
                format!("square_well;depth={depth:.17e};halfwidth={halfwidth:.17e}")
            }
            Family::ExpDecay { amplitude, scale } => {
                format!("exp_decay;amplitude={amplitude:.17e};scale={scale:.17e}")
            }
            Family::Tabulated { xs, vs } => {
                let mut s = String::from("tabulated");
                for (x, v) in xs.iter().zip(vs) {
                    s.push_str(&format!(";{x:.17e},{v:.17e}"));
                }
                s
            }
        }
    }

    /// FNV-1a hash of the canonical id, for binary cache keys.
    pub fn hash64(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical_id().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    /// True when evaluate(x) == evaluate(-x) for the family by construction,
    /// or (for tabulated data) verified on the sample grid.
    pub fn is_even(&self) -> bool {
        match &self.family {
            Family::Tabulated { xs, vs } => {
                let probe = |x: f64| -> f64 { interp_table(xs, vs, x) };
                xs.iter()
                    .all(|&x| (probe(x) - probe(-x)).abs() <= 1e-12 * (1.0 + probe(x).abs()))
            }
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

fn validate(family: &Family) -> Result<()> {
    let check_finite = |name: &'static str, v: f64| -> Result<()> {
        if !v.is_finite() {
            Err(Disperse1dError::NonFiniteParameter { name, value: v })
        } else {
            Ok(())
        }
    };
    let check_pos = |name: &'static str, v: f64| -> Result<()> {
        check_finite(name, v)?;
        if v <= 0.0 {
            Err(Disperse1dError::NonPositiveValue { name, value: v })
        } else {
            Ok(())
        }
    };
    match family {
        Family::Zero => Ok(()),
        Family::GaussianWell { depth, width } => {
            check_pos("depth", *depth)?;
            check_pos("width", *width)
        }
        Family::Sech2 { lambda } => check_pos("lambda", *lambda),
        Family::SquareWell { depth, halfwidth } => {
            check_pos("depth", *depth)?;
            check_pos("halfwidth", *halfwidth)
        }
        Family::ExpDecay { amplitude, scale } => {
            check_finite("amplitude", *amplitude)?;
            check_pos("scale", *scale)
        }
        Family::Tabulated { xs, vs } => {
            if xs.len() < 2 || xs.len() != vs.len() {
                return Err(Disperse1dError::EmptyTable);
            }
            for (i, w) in xs.windows(2).enumerate() {
                if !(w[1] > w[0]) {
                    return Err(Disperse1dError::UnsortedTable { row: i + 1 });
                }
            }
            for (i, v) in xs.iter().chain(vs.iter()).enumerate() {
                if !v.is_finite() {
                    return Err(Disperse1dError::Parse {
                        line: i,
                        msg: "non-finite table entry".into(),
                    });
                }
            }
            Ok(())
        }
    }
}

fn eval_raw(family: &Family, x: f64) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::GaussianWell { depth, width } => {
            let u = x / width;
            -depth * (-u * u).exp()
        }
        Family::Sech2 { lambda } => {
            let s = 1.0 / x.cosh();
            -lambda * (lambda + 1.0) * s * s
        }
        Family::SquareWell { depth, halfwidth } => {
            if x.abs() <= *halfwidth {
                -depth
            } else {
                0.0
            }
        }
        Family::ExpDecay { amplitude, scale } => amplitude * (-x.abs() / scale).exp(),
        Family::Tabulated { xs, vs } => interp_table(xs, vs, x),
    }
}

fn interp_table(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > *xs.last().unwrap() {
        return 0.0;
    }
    // binary search for the cell
    let mut lo = 0usize;
    let mut hi = xs.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    vs[lo] + t * (vs[hi] - vs[lo])
}

/// ||V||_L1 by closed form where available, else table trapezoid.
fn l1_closed_form(family: &Family) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::GaussianWell { depth, width } => depth * width * std::f64::consts::PI.sqrt(),
        Family::Sech2 { lambda } => 2.0 * lambda * (lambda + 1.0),
        Family::SquareWell { depth, halfwidth } => 2.0 * depth * halfwidth,
        Family::ExpDecay { amplitude, scale } => 2.0 * amplitude.abs() * scale,
        Family::Tabulated { xs, vs } => {
            let w: Vec<f64> = vs.iter().map(|v| v.abs()).collect();
            quad::trapezoid_graded(xs, &w)
        }
    }
}

/// One-sided tail integral of |V| from L to +infinity, closed form per family
/// (all parametric families are even, so the minus side mirrors).
fn eta_tail(family: &Family, l: f64) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::GaussianWell { depth, width } => {
            0.5 * depth * width * std::f64::consts::PI.sqrt() * libm::erfc(l / width)
        }
        Family::Sech2 { lambda } => lambda * (lambda + 1.0) * (1.0 - l.tanh()),
        Family::SquareWell { depth, halfwidth } => depth * (halfwidth - l).max(0.0),
        Family::ExpDecay { amplitude, scale } => amplitude.abs() * scale * (-l / scale).exp(),
        Family::Tabulated { .. } => unreachable!("tabulated cutoff is the table extent"),
    }
}

fn cutoff_radius(family: &Family, l1: f64) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::SquareWell { halfwidth, .. } => *halfwidth,
        Family::Tabulated { xs, .. } => xs[0].abs().max(xs.last().unwrap().abs()),
        fam => {
            let tol = CUTOFF_TOL * (1.0 + l1);
            let mut l = 0.0;
            while l <= CUTOFF_MAX {
                if 2.0 * eta_tail(fam, l) < tol {
                    return l;
                }
                l += CUTOFF_STEP;
            }
            CUTOFF_MAX
        }
    }
}

fn tabulated_tails(xs: &[f64], vs: &[f64], x: f64, sign: Sign) -> (f64, f64) {
    // clip the table to the tail side of x, inserting x itself as a node
    let mut gx: Vec<f64> = Vec::new();
    let mut gv: Vec<f64> = Vec::new();
    match sign {
        Sign::Plus => {
            if x > xs[0] && x < *xs.last().unwrap() {
                gx.push(x);
                gv.push(interp_table(xs, vs, x).abs());
            }
            for (&xi, &vi) in xs.iter().zip(vs) {
                if xi > x {
                    gx.push(xi);
                    gv.push(vi.abs());
                }
            }
        }
        Sign::Minus => {
            for (&xi, &vi) in xs.iter().zip(vs) {
                if xi < x {
                    gx.push(xi);
                    gv.push(vi.abs());
                }
            }
            if x > xs[0] && x < *xs.last().unwrap() {
                gx.push(x);
                gv.push(interp_table(xs, vs, x).abs());
            }
        }
    }
    if gx.len() < 2 {
        return (0.0, 0.0);
    }
    let eta = quad::trapezoid_graded(&gx, &gv);
    let weighted: Vec<f64> = gx.iter().zip(&gv).map(|(&y, &v)| (y - x).abs() * v).collect();
    let gamma = quad::trapezoid_graded(&gx, &weighted);
    (eta, gamma)
}
