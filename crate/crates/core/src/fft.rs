//! FFT plumbing shared by the momentum-profile and Sobolev-norm code.
//!
//! Conventions (unnormalized, matching the usual DFT):
//!   forward:  X_m = sum_j x_j exp(-2 pi i j m / M)
//!   inverse:  x_j = sum_m X_m exp(+2 pi i j m / M)   (caller divides by M)
//! Plans are cached per length in a process-wide table; planning is cheap but
//! not free and profile transforms reuse a handful of lengths heavily.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plans = Mutex<HashMap<(usize, bool), Arc<dyn rustfft::Fft<f64>>>>;

fn plans() -> &'static Plans {
    static PLANS: OnceLock<Plans> = OnceLock::new();
    PLANS.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan(len: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut table = plans().lock().unwrap();
    table
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

pub fn forward_inplace(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

pub fn inverse_inplace(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forward_matches_direct_dft() {
        let n = 12;
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let mut buf = x.clone();
        forward_inplace(&mut buf);
        for m in 0..n {
            let mut direct = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (j * m) as f64 / n as f64;
                direct += xj * Complex64::new(ang.cos(), ang.sin());
            }
            assert_abs_diff_eq!(buf[m].re, direct.re, epsilon = 1e-12);
            assert_abs_diff_eq!(buf[m].im, direct.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn roundtrip_recovers_input_after_scaling() {
        let n = 16384;
        let x: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64).sin(), 0.25 * (j as f64).cos()))
            .collect();
        let mut buf = x.clone();
        forward_inplace(&mut buf);
        inverse_inplace(&mut buf);
        for (a, b) in buf.iter().zip(&x) {
            assert_abs_diff_eq!(a.re / n as f64, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im / n as f64, b.im, epsilon = 1e-12);
        }
    }
}
