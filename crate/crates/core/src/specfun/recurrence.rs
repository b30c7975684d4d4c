//! Order recurrences for integer-order J and Y with a running log-scale, so
//! sequences stay representable long after the plain values would under- or
//! overflow.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{IspError, Result};

const BIG: f64 = 1e250;
const INV_BIG: f64 = 1e-250;
const LN_BIG: f64 = 575.646_273_248_511_4; // ln(1e250)
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the two-term power series is exact to rounding.
const TINY_ARG: f64 = 1e-8;
/// From here on Y_0 and Y_1 come from the Hankel asymptotic expansion.
const ASYMPTOTIC_ARG: f64 = 25.0;

/// Values `f_0 ..= f_max` of a cylinder function at one argument, each stored
/// as `mantissa * exp(scale)`.
#[derive(Debug, Clone)]
pub struct BesselSequence {
    x: f64,
    mant: Vec<f64>,
    scale: Vec<f64>,
}

impl BesselSequence {
    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.mant.len() - 1
    }

    /// Plain value; underflows to zero or saturates to infinity when the
    /// true value is outside the `f64` range.
    pub fn value(&self, n: usize) -> f64 {
        let (m, s) = self.scaled(n);
        if m == 0.0 {
            return 0.0;
        }
        // Split so that a large scale with a small mantissa does not overflow early.
        let e = s + m.abs().ln();
        m.signum() * e.exp()
    }

    /// `ln |f_n|`; `-inf` for an exact zero.
    pub fn ln_abs(&self, n: usize) -> f64 {
        let (m, s) = self.scaled(n);
        m.abs().ln() + s
    }

    pub fn signum(&self, n: usize) -> f64 {
        let m = self.mant[n];
        if m == 0.0 {
            0.0
        } else {
            m.signum()
        }
    }

    pub fn scaled(&self, n: usize) -> (f64, f64) {
        (self.mant[n], self.scale[n])
    }
}

pub(crate) fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(IspError::domain("x", x, "argument must be finite"));
    }
    if x <= 0.0 {
        return Err(IspError::domain("x", x, "argument must be positive"));
    }
    Ok(())
}

struct MillerPass {
    mant: Vec<f64>,
    shift: Vec<f64>,
    final_shift: f64,
    norm: f64,
    neumann0: f64,
    neumann1: f64,
}

/// Backward recurrence from far above `max(keep, x)`, normalised with
/// `J_0 + 2 sum J_2k = 1`. The Neumann sums for Y_0 and Y_1 ride along.
fn miller(x: f64, keep: usize) -> MillerPass {
    let top = keep.max(x.ceil() as usize);
    let mut start = top + (15.0 * (top as f64).cbrt()).ceil() as usize + 20;
    if start % 2 == 1 {
        start += 1;
    }
    let mut mant = vec![0.0; keep + 1];
    let mut shift = vec![0.0; keep + 1];

    let mut above = 0.0;
    let mut cur = 1.0;
    let mut sh = 0.0;
    let mut norm = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut order = start;
    loop {
        if order <= keep {
            mant[order] = cur;
            shift[order] = sh;
        }
        if order == 0 {
            norm += cur;
            break;
        }
        if order.is_multiple_of(2) {
            norm += 2.0 * cur;
            let k = (order / 2) as f64;
            let sign = if (order / 2).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            s0 += sign * cur / k;
        } else if order >= 3 {
            let k = ((order - 1) / 2) as f64;
            let sign = if ((order - 1) / 2).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            s1 += sign * (2.0 * k + 1.0) * cur / (k * (k + 1.0));
        }
        let below = (2.0 * order as f64 / x) * cur - above;
        above = cur;
        cur = below;
        order -= 1;
        if cur.abs() > BIG {
            cur *= INV_BIG;
            above *= INV_BIG;
            norm *= INV_BIG;
            s0 *= INV_BIG;
            s1 *= INV_BIG;
            sh += LN_BIG;
        }
    }
    MillerPass {
        mant,
        shift,
        final_shift: sh,
        norm,
        neumann0: s0,
        neumann1: s1,
    }
}

fn ln_factorial(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// `J_0 ..= J_max` at `x > 0`.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Result<BesselSequence> {
    check_argument(x)?;
    if x < TINY_ARG {
        let h = 0.5 * x;
        let mut mant = Vec::with_capacity(max_order + 1);
        let mut scale = Vec::with_capacity(max_order + 1);
        for n in 0..=max_order {
            mant.push(1.0 - h * h / (n as f64 + 1.0));
            scale.push(n as f64 * h.ln() - ln_factorial(n));
        }
        return Ok(BesselSequence { x, mant, scale });
    }
    let pass = miller(x, max_order);
    let mant = pass.mant.iter().map(|m| m / pass.norm).collect();
    let scale = pass.shift.iter().map(|s| s - pass.final_shift).collect();
    Ok(BesselSequence { x, mant, scale })
}

/// `(J_0, J_1, Y_0, Y_1)` for `x >= TINY_ARG`.
fn jy01(x: f64) -> (f64, f64, f64, f64) {
    if x >= ASYMPTOTIC_ARG {
        let (j0, y0) = hankel_asymptotic(0.0, x);
        let (j1, y1) = hankel_asymptotic(1.0, x);
        return (j0, j1, y0, y1);
    }
    let pass = miller(x, 1);
    let j0 = pass.mant[0] / pass.norm;
    let j1 = pass.mant[1] * (pass.shift[1] - pass.final_shift).exp() / pass.norm;
    let s0 = pass.neumann0 / pass.norm;
    let s1 = pass.neumann1 / pass.norm;
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = (2.0 / PI) * (lg * j0 - 2.0 * s0);
    let y1 = (2.0 / PI) * (-j0 / x + (lg - 1.0) * j1 - s1);
    (j0, j1, y0, y1)
}

/// Hankel's expansion for `J_nu, Y_nu` at large `x`, summed to the smallest term.
fn hankel_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        // a_k / x^k enters P with sign (-1)^{k/2} for even k, Q with (-1)^{(k-1)/2} for odd k.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 * p.abs().max(q.abs()) {
            break;
        }
    }
    // chi = x - (nu/2 + 1/4) pi, expanded so that sin/cos see the exact argument.
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if nu == 0.0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// `Y_0 ..= Y_max` at `x > 0` by upward recurrence.
pub fn bessel_y_sequence(max_order: usize, x: f64) -> Result<BesselSequence> {
    check_argument(x)?;
    // Start values, with Y_1 possibly carried in scaled form.
    let (y0, y1_mant, mut sh) = if x < TINY_ARG {
        let y0 = (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA);
        (y0, -2.0 / PI, -x.ln())
    } else {
        let (_, _, y0, y1) = jy01(x);
        (y0, y1, 0.0)
    };
    let mut mant = Vec::with_capacity(max_order + 1);
    let mut scale = Vec::with_capacity(max_order + 1);
    mant.push(y0);
    scale.push(0.0);
    if max_order == 0 {
        return Ok(BesselSequence { x, mant, scale });
    }
    mant.push(y1_mant);
    scale.push(sh);
    let mut prev = y0 * (-sh).exp();
    let mut cur = y1_mant;
    for n in 1..max_order {
        let next = (2.0 * n as f64 / x) * cur - prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur *= INV_BIG;
            prev *= INV_BIG;
            sh += LN_BIG;
        }
        mant.push(cur);
        scale.push(sh);
    }
    Ok(BesselSequence { x, mant, scale })
}

/// `H_0^(1)(x) = J_0(x) + i Y_0(x)` for kernel evaluation.
pub(crate) fn hankel0(x: f64) -> Result<(f64, f64)> {
    check_argument(x)?;
    if x < TINY_ARG {
        let y0 = (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA);
        return Ok((1.0 - 0.25 * x * x, y0));
    }
    let (j0, _, y0, _) = jy01(x);
    Ok((j0, y0))
}

/// `ln(a^2 + b^2)` for scaled numbers `a = ma e^sa`, `b = mb e^sb`.
pub(crate) fn ln_sum_squares(a: (f64, f64), b: (f64, f64)) -> f64 {
    let la = a.0.abs().ln() + a.1;
    let lb = b.0.abs().ln() + b.1;
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    2.0 * hi + (2.0 * (lo - hi)).exp().ln_1p()
}
