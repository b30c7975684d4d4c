//! Bandwidth of a spectrum and its Bessel-zero bounds.
//!
//! The bandwidth is the smallest `m` from which `sigma_m` is strictly
//! decreasing. It is bracketed by the first `m` whose first `J`-zero reaches
//! `kappa0` (lower bound) and the first `m` whose first `Y`-zero does (upper
//! bound, observed but not proven).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{IspError, Result};
use crate::geometry::ProblemGeometry;
use crate::singular::{build_spectrum, default_horizon, SpectrumTable};
use crate::specfun::{first_zero_j, first_zero_y, A_MINUS};

/// Tolerance that resolves `zero >= kappa0` inclusively.
const TIE_TOL: f64 = 1e-9;
/// Rows at the end of the table that must be strictly decreasing.
const TAIL_ROWS: usize = 10;

/// Shortest horizon [`bandwidth`] accepts for a given `kappa0`.
pub fn required_horizon(kappa0: f64) -> usize {
    kappa0.ceil() as usize + (3.0 * kappa0.cbrt()).ceil() as usize + 20
}

/// Smallest `m` such that `log sigma` is strictly decreasing on
/// `[m, max_order]`.
///
/// Fails with [`IspError::Horizon`] when the table is too short or its tail
/// is not yet strictly decreasing, since then the answer could change with a
/// longer table.
pub fn bandwidth(spectrum: &SpectrumTable) -> Result<usize> {
    let kappa0 = spectrum.geometry().kappa0();
    let rows = spectrum.rows();
    let horizon = spectrum.max_order();
    let need = required_horizon(kappa0);
    if horizon < need {
        return Err(IspError::Horizon {
            horizon,
            kappa0,
            detail: format!("at least {need} orders are required"),
        });
    }
    let tail = &rows[rows.len() - TAIL_ROWS..];
    if let Some(bad) = tail.iter().find(|r| !r.log_sigma.is_finite()) {
        return Err(IspError::Horizon {
            horizon,
            kappa0,
            detail: format!("log sigma at m = {} is not finite", bad.m),
        });
    }
    if let Some(w) = tail.windows(2).find(|w| w[1].log_sigma >= w[0].log_sigma) {
        return Err(IspError::Horizon {
            horizon,
            kappa0,
            detail: format!("spectrum still rising at m = {}", w[1].m),
        });
    }
    let mut m = horizon;
    while m > 0 && rows[m - 1].log_sigma > rows[m].log_sigma {
        m -= 1;
    }
    Ok(m)
}

/// First `m` with `zero(m) >= kappa0`; `zero` must be increasing with
/// `zero(m) > m`, so the answer lies in `0 ..= ceil(kappa0)`.
fn first_order_reaching<F>(kappa0: f64, zero: F) -> Result<usize>
where
    F: Fn(u32) -> Result<f64>,
{
    if !(kappa0.is_finite() && kappa0 > 0.0) {
        return Err(IspError::domain("kappa0", kappa0, "must be positive"));
    }
    let reaches = |m: usize| -> Result<bool> { Ok(zero(m as u32)? >= kappa0 - TIE_TOL) };
    let mut lo = 0usize;
    let mut hi = kappa0.ceil() as usize;
    if reaches(lo)? {
        return Ok(0);
    }
    // invariant: !reaches(lo) && reaches(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Lower bound: first `m` with `j_{m,1} >= kappa0`.
pub fn bound_lower(kappa0: f64) -> Result<usize> {
    first_order_reaching(kappa0, |m| Ok(first_zero_j(m)?.value))
}

/// Upper bound: first `m` with `y_{m,1} >= kappa0`.
pub fn bound_upper(kappa0: f64) -> Result<usize> {
    first_order_reaching(kappa0, |m| Ok(first_zero_y(m)?.value))
}

/// Real root of `n^3 + a n - kappa0 = 0` by Cardano's formula.
pub fn cubic_root(kappa0: f64, a: f64) -> f64 {
    let c = (108.0 * kappa0 + 12.0 * (12.0 * a.powi(3) + 81.0 * kappa0 * kappa0).sqrt()).cbrt();
    c / 6.0 - 2.0 * a / c
}

/// Approximate lower bound from `j_{m,1} ~ m + a m^{1/3}`.
pub fn bound_lower_approx(kappa0: f64) -> usize {
    let n = cubic_root(kappa0, A_MINUS);
    n.powi(3).ceil().max(0.0) as usize
}

/// Approximate upper bound `ceil(kappa0)`.
pub fn bound_upper_approx(kappa0: f64) -> usize {
    kappa0.ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub geometry: ProblemGeometry,
    pub bandwidth: usize,
    pub lower: usize,
    pub upper: usize,
    pub lower_approx: usize,
    pub upper_approx: usize,
    /// Largest order in the spectrum the bandwidth was read from.
    pub horizon: usize,
    /// Whether `bandwidth <= upper` held.
    pub upper_bound_holds: bool,
}

impl BandwidthReport {
    /// Largest useful angular step `pi / lower`.
    pub fn max_angular_step(&self) -> Result<f64> {
        angular_step(self.lower, self.geometry.kappa0())
    }
}

fn angular_step(lower: usize, kappa0: f64) -> Result<f64> {
    if lower == 0 {
        return Err(IspError::NoStableBand { kappa0 });
    }
    Ok(PI / lower as f64)
}

/// All bandwidth quantities for `g`, reading the bandwidth from a spectrum
/// with the default horizon.
pub fn report(g: &ProblemGeometry) -> Result<BandwidthReport> {
    report_with_horizon(g, default_horizon(g.kappa0()))
}

pub fn report_with_horizon(g: &ProblemGeometry, horizon: usize) -> Result<BandwidthReport> {
    let spectrum = build_spectrum(g, horizon)?;
    report_from_spectrum(&spectrum)
}

pub fn report_from_spectrum(spectrum: &SpectrumTable) -> Result<BandwidthReport> {
    let g = *spectrum.geometry();
    let kappa0 = g.kappa0();
    let b = bandwidth(spectrum)?;
    let lower = bound_lower(kappa0)?;
    let upper = bound_upper(kappa0)?;
    let upper_bound_holds = b <= upper;
    if !upper_bound_holds {
        log::warn!("bandwidth {b} exceeds the upper bound {upper} at kappa0 = {kappa0}");
    }
    if lower > b {
        log::error!("bandwidth {b} is below the lower bound {lower} at kappa0 = {kappa0}");
    }
    Ok(BandwidthReport {
        geometry: g,
        bandwidth: b,
        lower,
        upper,
        lower_approx: bound_lower_approx(kappa0),
        upper_approx: bound_upper_approx(kappa0),
        horizon: spectrum.max_order(),
        upper_bound_holds,
    })
}

/// `pi / B_-`: angular sampling finer than this step adds no stable
/// information.
pub fn max_angular_sampling(g: &ProblemGeometry) -> Result<f64> {
    angular_step(bound_lower(g.kappa0())?, g.kappa0())
}
