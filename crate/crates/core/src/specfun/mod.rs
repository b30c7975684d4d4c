//! Integer-order Bessel functions, the Hankel modulus in log form, first
//! positive zeros, and the slow independent oracles used to check them.
//!
//! `J_m` comes from Miller's backward recurrence normalised by
//! `J_0 + 2 sum J_2k = 1`; `Y_m` from upward recurrence started at `Y_0, Y_1`
//! (Neumann series below `x = 25`, Hankel's expansion above). Both keep a
//! running log-scale so that `ln |H_m|^2` stays finite for orders in the
//! thousands.

mod k0;
mod nicholson;
mod real_order;
mod recurrence;
mod zeros;

pub use k0::ln_bessel_k0;
pub use nicholson::nicholson_abs2_oracle;
pub use real_order::{bessel_j_real_order, order_zeros};
pub use recurrence::{bessel_j_sequence, bessel_y_sequence, BesselSequence};
pub use zeros::{first_zero_j, first_zero_y, ZeroKind, ZeroRecord, A_MINUS, A_PLUS};

pub(crate) use recurrence::{hankel0, ln_sum_squares};

use crate::error::Result;

/// `J_m(x)` for `x > 0`.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    Ok(bessel_j_sequence(m as usize, x)?.value(m as usize))
}

/// `Y_m(x)` for `x > 0`. Saturates to `-inf` once `|Y_m|` leaves the `f64`
/// range; use [`log_hankel_abs2`] for large orders.
pub fn bessel_y(m: u32, x: f64) -> Result<f64> {
    Ok(bessel_y_sequence(m as usize, x)?.value(m as usize))
}

/// `J_m(x)` for signed order, `J_{-m} = (-1)^m J_m`, with the limit at `x = 0`.
pub fn bessel_j_signed(m: i64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let v = bessel_j(m.unsigned_abs() as u32, x)?;
    Ok(if m < 0 && m % 2 != 0 { -v } else { v })
}

/// `ln(J_m(x)^2 + Y_m(x)^2)`, finite for all representable orders.
pub fn log_hankel_abs2(m: u32, x: f64) -> Result<f64> {
    let n = m as usize;
    let j = bessel_j_sequence(n, x)?;
    let y = bessel_y_sequence(n, x)?;
    Ok(ln_sum_squares(j.scaled(n), y.scaled(n)))
}

/// `arg H_m^(1)(x)` for signed order; the scaled pair keeps the phase exact
/// when `Y_m` itself would overflow.
pub fn hankel_phase(m: i64, x: f64) -> Result<f64> {
    let n = m.unsigned_abs() as usize;
    let j = bessel_j_sequence(n, x)?;
    let y = bessel_y_sequence(n, x)?;
    Ok(phase_from_sequences(m, &j, &y))
}

pub(crate) fn phase_from_sequences(m: i64, j: &BesselSequence, y: &BesselSequence) -> f64 {
    let n = m.unsigned_abs() as usize;
    let (mj, sj) = j.scaled(n);
    let (my, sy) = y.scaled(n);
    let s = sj.max(sy);
    let mut re = mj * (sj - s).exp();
    let mut im = my * (sy - s).exp();
    if m < 0 && m % 2 != 0 {
        re = -re;
        im = -im;
    }
    im.atan2(re)
}
