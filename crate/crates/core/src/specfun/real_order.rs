//! `J_mu(x)` for real order `mu >= 0` at a fixed argument, used to locate
//! zeros of `mu -> J_mu(x)`.
//!
//! Plain power series, so cancellation grows like `e^x`; keep `x` below
//! about 20 when a root location to 1e-8 is needed.

use statrs::function::gamma::ln_gamma;

use crate::error::{IspError, Result};

use super::recurrence::check_argument;

/// `sum_k (-1)^k (x/2)^{mu+2k} / (k! Gamma(mu+k+1))`.
pub fn bessel_j_real_order(mu: f64, x: f64) -> Result<f64> {
    check_argument(x)?;
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(IspError::domain(
            "mu",
            mu,
            "order must be finite and nonnegative",
        ));
    }
    let half = 0.5 * x;
    if half == 0.0 {
        return Ok(if mu == 0.0 { 1.0 } else { 0.0 });
    }
    let mut term = (mu * half.ln() - ln_gamma(mu + 1.0)).exp();
    let q = -half * half;
    let mut sum = term;
    let mut peak = term.abs();
    for k in 1..2000usize {
        let kf = k as f64;
        term *= q / (kf * (mu + kf));
        peak = peak.max(term.abs());
        sum += term;
        if kf > half && term.abs() < 1e-18 * peak {
            break;
        }
    }
    Ok(sum)
}

/// Zeros of `mu -> J_mu(x)` on `[0, mu_max]`, located by a scan with step
/// `0.05` and bisection to `tol`.
pub fn order_zeros(x: f64, mu_max: f64, tol: f64) -> Result<Vec<f64>> {
    const STEP: f64 = 0.05;
    let mut zeros = Vec::new();
    let mut a = 0.0;
    let mut fa = bessel_j_real_order(a, x)?;
    while a < mu_max {
        let b = (a + STEP).min(mu_max);
        let fb = bessel_j_real_order(b, x)?;
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_j_real_order(mid, x)?;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::super::bessel_j;
    use super::*;

    #[test]
    fn integer_orders_match_recurrence() {
        for m in 0..12u32 {
            for &x in &[0.5, 3.0, 9.0, 15.0] {
                let a = bessel_j_real_order(m as f64, x).unwrap();
                let b = bessel_j(m, x).unwrap();
                assert!(
                    (a - b).abs() < 1e-15 * x.exp(),
                    "m = {m}, x = {x}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2 / (pi x)) sin x
        for &x in &[0.3, 2.0, 7.5] {
            let want = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
            assert!((bessel_j_real_order(0.5, x).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn order_zeros_bracket_sign_changes() {
        let zs = order_zeros(12.0, 14.0, 1e-10).unwrap();
        assert!(!zs.is_empty());
        for z in zs {
            let a = bessel_j_real_order(z - 1e-6, 12.0).unwrap();
            let b = bessel_j_real_order(z + 1e-6, 12.0).unwrap();
            assert!(a * b < 0.0, "zero at {z}");
        }
    }
}
