use std::f64::consts::PI;

use crate::error::{IspError, Result};
use crate::quadrature::integrate_adaptive;

use super::k0::ln_bessel_k0;
use super::recurrence::check_argument;

/// `ln |H_m^(1)(x)|^2` from Nicholson's integral
/// `(8/pi^2) int_0^inf K_0(2 x sinh t) cosh(2 m t) dt`.
///
/// Independent of the order recurrences; slow, and meant as a test oracle.
pub fn nicholson_abs2_oracle(m: u32, x: f64) -> Result<f64> {
    check_argument(x)?;
    let mf = m as f64;
    let log_integrand = |t: f64| -> f64 {
        if t == 0.0 {
            return f64::INFINITY;
        }
        let z = 2.0 * x * t.sinh();
        let lk = ln_bessel_k0(z).unwrap_or(f64::NEG_INFINITY);
        let y = 2.0 * mf * t;
        lk + y + (-2.0 * y).exp().ln_1p() - std::f64::consts::LN_2
    };

    // The integrand peaks where 2 x cosh t = 2 m (interior only when m > x).
    let t_peak = if mf > x { (mf / x).acosh() } else { 0.0 };
    let t_ref = if t_peak > 0.0 {
        t_peak
    } else {
        1e-3 / (1.0 + x)
    };
    let f_ref = log_integrand(t_ref);
    let mut t_end = t_peak + 1.0 / (1.0 + x);
    while log_integrand(t_end) > f_ref - 60.0 {
        t_end *= 1.5;
        if t_end > 50.0 {
            return Err(IspError::Quadrature { achieved: f64::NAN });
        }
    }

    let integrand = |t: f64| (log_integrand(t) - f_ref).exp();
    let tol = 1e-13;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut pieces = vec![0.0];
    if t_peak > 0.0 {
        pieces.push(t_peak);
    }
    pieces.push(t_end);
    for w in pieces.windows(2) {
        let (v, e) = integrate_adaptive(integrand, w[0], w[1], tol)?;
        total += v;
        err += e;
    }
    if !(total > 0.0 && total.is_finite()) || err > 1e-9 * total {
        return Err(IspError::Quadrature {
            achieved: err / total.abs(),
        });
    }
    Ok((8.0 / (PI * PI)).ln() + f_ref + total.ln())
}
