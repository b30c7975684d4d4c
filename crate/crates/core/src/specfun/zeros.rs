use serde::{Deserialize, Serialize};

use crate::error::{IspError, Result};

use super::recurrence::{bessel_j_sequence, bessel_y_sequence};

/// Leading coefficient in `j_{m,1} = m + A_MINUS m^{1/3} + O(m^{-1/3})`.
pub const A_MINUS: f64 = 1.855757;
/// Leading coefficient in `y_{m,1} = m + A_PLUS m^{1/3} + O(m^{-1/3})`.
pub const A_PLUS: f64 = 0.931577;

const ZERO_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 50;
/// Scan step; consecutive positive zeros of J_m and Y_m are more than 2 apart.
const SCAN_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroKind {
    /// Bessel function of the first kind, `J_m`.
    FirstKind,
    /// Bessel function of the second kind, `Y_m`.
    SecondKind,
}

impl ZeroKind {
    fn symbol(self) -> &'static str {
        match self {
            ZeroKind::FirstKind => "J",
            ZeroKind::SecondKind => "Y",
        }
    }
}

/// First positive zero of `J_m` or `Y_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub order: u32,
    pub kind: ZeroKind,
    pub value: f64,
}

/// Value and derivative of `J_m` or `Y_m` at `x`.
fn value_and_slope(kind: ZeroKind, m: u32, x: f64) -> Result<(f64, f64)> {
    let n = m as usize;
    let seq = match kind {
        ZeroKind::FirstKind => bessel_j_sequence(n + 1, x)?,
        ZeroKind::SecondKind => bessel_y_sequence(n + 1, x)?,
    };
    let f = seq.value(n);
    // C_m' = (m/x) C_m - C_{m+1}
    let slope = (m as f64 / x) * f - seq.value(n + 1);
    Ok((f, slope))
}

fn bracket_error(kind: ZeroKind, m: u32, detail: String) -> IspError {
    IspError::Bracketing {
        kind: kind.symbol(),
        order: m,
        detail,
    }
}

/// Safeguarded Newton inside `[lo, hi]`; the function changes sign exactly once there.
fn polish(kind: ZeroKind, m: u32, mut lo: f64, mut hi: f64, guess: f64) -> Result<f64> {
    let (f_lo, _) = value_and_slope(kind, m, lo)?;
    let lo_sign = f_lo.signum();
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..MAX_NEWTON {
        let (f, df) = value_and_slope(kind, m, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step < 1e-3 * ZERO_TOL || hi - lo < ZERO_TOL {
            return Ok(x);
        }
    }
    if hi - lo < ZERO_TOL {
        return Ok(0.5 * (lo + hi));
    }
    Err(bracket_error(
        kind,
        m,
        format!("no convergence in {MAX_NEWTON} iterations, bracket [{lo}, {hi}]"),
    ))
}

/// First positive zero `j_{m,1}` of `J_m`.
///
/// `J_m` is positive on `(0, j_{m,1})` and `j_{m,1} > m`, so scanning from
/// `m` upward until the first sign change both brackets the zero and rules
/// out an earlier one.
pub fn first_zero_j(m: u32) -> Result<ZeroRecord> {
    let kind = ZeroKind::FirstKind;
    let mf = m as f64;
    let start = if m == 0 { 1e-3 } else { mf };
    let guess = if m == 0 {
        2.404_825_557_695_773
    } else {
        mf + A_MINUS * mf.cbrt()
    };

    let (f_start, _) = value_and_slope(kind, m, start)?;
    if f_start <= 0.0 {
        return Err(bracket_error(
            kind,
            m,
            format!("J_{m}({start}) = {f_start} is not positive"),
        ));
    }
    let mut lo = start;
    let mut hi = start;
    let limit = mf + 10.0 * (mf.cbrt() + 1.0) + 5.0;
    loop {
        hi += SCAN_STEP;
        if hi > limit {
            return Err(bracket_error(
                kind,
                m,
                format!("no sign change below {limit}"),
            ));
        }
        let (f, _) = value_and_slope(kind, m, hi)?;
        if f <= 0.0 {
            if f == 0.0 {
                return Ok(ZeroRecord {
                    order: m,
                    kind,
                    value: hi,
                });
            }
            break;
        }
        lo = hi;
    }
    let value = polish(kind, m, lo, hi, guess)?;
    Ok(ZeroRecord {
        order: m,
        kind,
        value,
    })
}

/// First positive zero `y_{m,1}` of `Y_m`, bracketed in `(max(m, eps), j_{m,1})`
/// by interlacing.
pub fn first_zero_y(m: u32) -> Result<ZeroRecord> {
    let kind = ZeroKind::SecondKind;
    let mf = m as f64;
    let j = first_zero_j(m)?.value;
    let lo = if m == 0 { 0.1 } else { mf };
    let (f_lo, _) = value_and_slope(kind, m, lo)?;
    let (f_hi, _) = value_and_slope(kind, m, j)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(bracket_error(
            kind,
            m,
            format!("no sign change on [{lo}, {j}]: Y = {f_lo}, {f_hi}"),
        ));
    }
    // Y_m is increasing on (0, y_{m,1}]; a single sign change is guaranteed
    // since j_{m,1} < y_{m,2}.
    let guess = if m == 0 {
        0.893_576_966_279_167_5
    } else {
        mf + A_PLUS * mf.cbrt()
    };
    let value = polish(kind, m, lo, j, guess)?;
    Ok(ZeroRecord {
        order: m,
        kind,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference zeros.
    const J_ZEROS: &[(u32, f64)] = &[
        (0, 2.404_825_557_695_773),
        (1, 3.831_705_970_207_512),
        (25, 30.779_039_186_567_266),
        (26, 31.845_887_278_687_318),
        (100, 108.836_165_898_409_77),
        (300, 312.577_361_606_849_3),
        (1000, 1018.660_880_967_907_9),
    ];
    const Y_ZEROS: &[(u32, f64)] = &[
        (0, 0.893_576_966_279_167_5),
        (1, 2.197_141_326_031_017),
        (28, 30.914_957_568_420_552),
        (29, 31.947_230_382_410_52),
        (100, 104.380_204_256_866_1),
        (300, 306.275_212_752_974_5),
    ];

    #[test]
    fn j_zeros_match_reference() {
        for &(m, want) in J_ZEROS {
            let z = first_zero_j(m).unwrap();
            assert_eq!(z.kind, ZeroKind::FirstKind);
            assert!(
                (z.value - want).abs() < 1e-10,
                "j_{m},1 = {} vs {want}",
                z.value
            );
        }
    }

    #[test]
    fn y_zeros_match_reference() {
        for &(m, want) in Y_ZEROS {
            let z = first_zero_y(m).unwrap();
            assert_eq!(z.kind, ZeroKind::SecondKind);
            assert!(
                (z.value - want).abs() < 1e-10,
                "y_{m},1 = {} vs {want}",
                z.value
            );
        }
    }

    #[test]
    fn j_zero_leading_asymptotics() {
        // j_{m,1} - m - a_- m^{1/3} = O(m^{-1/3})
        let mut last = f64::INFINITY;
        for m in [10u32, 100, 1000, 4000] {
            let mf = m as f64;
            let resid = first_zero_j(m).unwrap().value - mf - A_MINUS * mf.cbrt();
            let scaled = resid * mf.cbrt();
            assert!(resid.abs() < last, "residual must shrink, m = {m}");
            assert!(scaled.abs() < 1.5, "m = {m}: scaled residual {scaled}");
            last = resid.abs();
        }
    }

    #[test]
    fn y_zero_leading_asymptotics() {
        let mut last = f64::INFINITY;
        for m in [10u32, 100, 1000, 4000] {
            let mf = m as f64;
            let resid = first_zero_y(m).unwrap().value - mf - A_PLUS * mf.cbrt();
            assert!(resid.abs() < last, "m = {m}");
            last = resid.abs();
        }
        assert!(last < 0.05);
    }

    #[test]
    fn returned_zero_is_the_first_one() {
        for m in [0u32, 1, 2, 7, 40] {
            let z = first_zero_j(m).unwrap().value;
            let lo = if m == 0 { 1e-6 } else { 0.5 * m as f64 };
            let n = 2000;
            for i in 0..n {
                let x = lo + (z - 1e-8 - lo) * i as f64 / n as f64;
                assert!(
                    super::super::bessel_j(m, x).unwrap() > 0.0,
                    "m = {m}, x = {x}"
                );
            }
        }
    }
}
