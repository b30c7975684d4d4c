use crate::error::Result;

use super::recurrence::check_argument;

/// `ln K_0(z)` for `z > 0`.
///
/// Trapezoid rule on `K_0(z) = e^{-z} int_0^inf exp(-2 z sinh^2(u/2)) du`;
/// the integrand is entire and decays doubly exponentially, so the rule
/// converges geometrically in `1/h`.
pub fn ln_bessel_k0(z: f64) -> Result<f64> {
    check_argument(z)?;
    let h = 0.1f64.min(0.5 / z.sqrt());
    // exp(-45) relative to the u = 0 value is far below rounding.
    let u_max = (1.0 + 45.0 / z).acosh();
    let mut sum = 0.5;
    let mut j = 1usize;
    loop {
        let u = j as f64 * h;
        if u > u_max {
            break;
        }
        let s = (0.5 * u).sinh();
        sum += (-2.0 * z * s * s).exp();
        j += 1;
    }
    Ok(-z + (h * sum).ln())
}
