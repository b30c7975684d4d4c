//! Parameter sweeps over the size parameter, linear fits of the bandwidth,
//! the measurement-radius study and the asymptotic regimes of `sigma_m`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bandwidth::{self, BandwidthReport};
use crate::error::{IspError, Result};
use crate::geometry::ProblemGeometry;
use crate::singular::{build_spectrum, default_horizon};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_points: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// `kappa / kappa0`; 1 sweeps equal sizes.
    pub ratio: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_points: 300,
            kappa_min: 2.0,
            kappa_max: 100.0 * PI,
            ratio: 1.0,
        }
    }
}

impl SweepConfig {
    /// `kappa_i = min + i (max - min) / (n - 1)`, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.n_points;
        let step = (self.kappa_max - self.kappa_min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.kappa_max
                } else {
                    self.kappa_min + i as f64 * step
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(IspError::InvalidArgument(
                "a sweep needs at least 2 points".into(),
            ));
        }
        if !(self.kappa_min > 0.0 && self.kappa_max > self.kappa_min && self.kappa_max.is_finite())
        {
            return Err(IspError::InvalidArgument(format!(
                "invalid sweep range [{}, {}]",
                self.kappa_min, self.kappa_max
            )));
        }
        if !(self.ratio >= 1.0 && self.ratio.is_finite()) {
            return Err(IspError::InvalidArgument(format!(
                "ratio must be >= 1, got {}",
                self.ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kappa: f64,
    pub kappa0: f64,
    pub bandwidth: usize,
    pub lower: usize,
    pub upper: usize,
    pub lower_approx: usize,
    pub upper_approx: usize,
    pub eps_minus: i64,
    pub eps_plus: i64,
    pub relerr_minus: f64,
    pub relerr_plus: f64,
}

/// `|eps| / B`; for `B = 0` a zero error counts as 0 and any other as `inf`.
pub fn relative_error(eps: i64, bandwidth: usize) -> f64 {
    if bandwidth > 0 {
        eps.unsigned_abs() as f64 / bandwidth as f64
    } else if eps == 0 {
        0.0
    } else {
        f64::INFINITY
    }
}

impl SweepRecord {
    pub fn from_report(r: &BandwidthReport) -> Self {
        let b = r.bandwidth as i64;
        let eps_minus = r.lower as i64 - b;
        let eps_plus = r.upper as i64 - b;
        Self {
            kappa: r.geometry.kappa(),
            kappa0: r.geometry.kappa0(),
            bandwidth: r.bandwidth,
            lower: r.lower,
            upper: r.upper,
            lower_approx: r.lower_approx,
            upper_approx: r.upper_approx,
            eps_minus,
            eps_plus,
            relerr_minus: relative_error(eps_minus, r.bandwidth),
            relerr_plus: relative_error(eps_plus, r.bandwidth),
        }
    }

    /// Relative error of `ceil(kappa0)` against the bandwidth.
    pub fn relerr_upper_approx(&self) -> f64 {
        relative_error(
            self.upper_approx as i64 - self.bandwidth as i64,
            self.bandwidth,
        )
    }
}

/// One record per grid point, in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    config
        .grid()
        .into_iter()
        .map(|kappa| {
            let g = ProblemGeometry::from_size_parameters(kappa / config.ratio, kappa)?;
            let r = bandwidth::report(&g).map_err(|e| {
                log::error!("sweep failed at kappa = {kappa}: {e}");
                e
            })?;
            Ok(SweepRecord::from_report(&r))
        })
        .collect()
}

/// Aggregate error statistics of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub mean_eps_minus: f64,
    pub mean_eps_plus: f64,
    pub max_abs_eps_minus: u64,
    pub max_abs_eps_plus: u64,
    /// Points where the lower bound exceeds the bandwidth.
    pub lower_violations: Vec<f64>,
    /// Points where the bandwidth exceeds the upper bound.
    pub upper_violations: Vec<f64>,
    /// Largest kappa with `relerr_minus >= 5%`, if any.
    pub last_large_relerr_minus: Option<f64>,
    pub last_large_relerr_plus: Option<f64>,
    pub last_large_relerr_upper_approx: Option<f64>,
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let n = records.len().max(1) as f64;
    let last_where = |pred: &dyn Fn(&SweepRecord) -> bool| {
        records
            .iter()
            .filter(|r| pred(r))
            .map(|r| r.kappa)
            .fold(None, |a: Option<f64>, k| Some(a.map_or(k, |a| a.max(k))))
    };
    SweepSummary {
        mean_eps_minus: records.iter().map(|r| r.eps_minus as f64).sum::<f64>() / n,
        mean_eps_plus: records.iter().map(|r| r.eps_plus as f64).sum::<f64>() / n,
        max_abs_eps_minus: records
            .iter()
            .map(|r| r.eps_minus.unsigned_abs())
            .max()
            .unwrap_or(0),
        max_abs_eps_plus: records
            .iter()
            .map(|r| r.eps_plus.unsigned_abs())
            .max()
            .unwrap_or(0),
        lower_violations: records
            .iter()
            .filter(|r| r.lower > r.bandwidth)
            .map(|r| r.kappa)
            .collect(),
        upper_violations: records
            .iter()
            .filter(|r| r.bandwidth > r.upper)
            .map(|r| r.kappa)
            .collect(),
        last_large_relerr_minus: last_where(&|r| r.relerr_minus >= 0.05),
        last_large_relerr_plus: last_where(&|r| r.relerr_plus >= 0.05),
        last_large_relerr_upper_approx: last_where(&|r| r.relerr_upper_approx() >= 0.05),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegressionTarget {
    Bandwidth,
    Lower,
    Upper,
}

impl RegressionTarget {
    pub const ALL: [RegressionTarget; 3] = [Self::Bandwidth, Self::Lower, Self::Upper];

    fn value(&self, r: &SweepRecord) -> f64 {
        match self {
            Self::Bandwidth => r.bandwidth as f64,
            Self::Lower => r.lower as f64,
            Self::Upper => r.upper as f64,
        }
    }
}

impl fmt::Display for RegressionTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bandwidth => "B",
            Self::Lower => "B_minus",
            Self::Upper => "B_plus",
        })
    }
}

/// Ordinary least squares of a bandwidth quantity against `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub target: RegressionTarget,
    pub slope: f64,
    pub intercept: f64,
    /// Mean of `|y - fit|`.
    pub mean_abs_error: f64,
    /// Standard error of the fitted slope.
    pub std_dev: f64,
}

pub fn fit_linear(records: &[SweepRecord], target: RegressionTarget) -> Result<RegressionFit> {
    let n = records.len();
    if n < 2 {
        return Err(IspError::InvalidArgument(
            "a fit needs at least 2 records".into(),
        ));
    }
    let nf = n as f64;
    let xbar = records.iter().map(|r| r.kappa).sum::<f64>() / nf;
    let ybar = records.iter().map(|r| target.value(r)).sum::<f64>() / nf;
    let sxx: f64 = records.iter().map(|r| (r.kappa - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(IspError::InvalidArgument(
            "all kappa values are equal".into(),
        ));
    }
    let sxy: f64 = records
        .iter()
        .map(|r| (r.kappa - xbar) * (target.value(r) - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let resid: Vec<f64> = records
        .iter()
        .map(|r| target.value(r) - (slope * r.kappa + intercept))
        .collect();
    let mean_abs_error = resid.iter().map(|e| e.abs()).sum::<f64>() / nf;
    let std_dev = if n > 2 {
        (resid.iter().map(|e| e * e).sum::<f64>() / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(RegressionFit {
        target,
        slope,
        intercept,
        mean_abs_error,
        std_dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub ratio: f64,
    pub kappa: f64,
    pub bandwidth: usize,
    pub peak_order: usize,
    pub peak_log_sigma: f64,
}

/// Bandwidth and peak singular value for `kappa = ratio * kappa0`, with the
/// measurement radius fixed at 1.
pub fn r_independence_study(kappa0: f64, ratios: &[f64]) -> Result<Vec<RadiusRow>> {
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio >= 1.0 && ratio.is_finite()) {
                return Err(IspError::InvalidArgument(format!(
                    "ratio must be >= 1, got {ratio}"
                )));
            }
            let kappa = ratio * kappa0;
            let g = ProblemGeometry::from_size_parameters(kappa0, kappa)?;
            let spectrum = build_spectrum(&g, default_horizon(kappa0))?;
            let b = bandwidth::bandwidth(&spectrum)?;
            let (peak_order, peak_log_sigma) = spectrum.peak();
            Ok(RadiusRow {
                ratio,
                kappa,
                bandwidth: b,
                peak_order,
                peak_log_sigma,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Large arguments: `sigma_m ~ (sqrt 2 / pi) lambda sqrt(R0)`.
    Plateau,
    /// Small arguments: `sigma_m ~ (1/m) sqrt(2/(m+1)) (R0/R)^{m-1/2} R0^{3/2}`.
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub regime: Regime,
    pub m: usize,
    pub kappa0: f64,
    pub kappa: f64,
    pub computed: f64,
    pub predicted: f64,
    /// `|computed / predicted - 1|`.
    pub deviation: f64,
    pub in_regime: bool,
}

pub fn plateau_value(g: &ProblemGeometry) -> f64 {
    2.0f64.sqrt() / PI * g.wavelength() * g.r0().sqrt()
}

pub fn decay_value(g: &ProblemGeometry, m: usize) -> f64 {
    let mf = m as f64;
    (2.0 / (mf + 1.0)).sqrt() / mf * (g.r0() / g.r()).powf(mf - 0.5) * g.r0().powf(1.5)
}

/// Compares `sigma_m` against both asymptotic forms for every geometry and
/// order; pairs outside a regime are kept but flagged.
pub fn asymptotic_checks(
    geometries: &[ProblemGeometry],
    orders: &[usize],
) -> Result<Vec<AsymptoticCheck>> {
    let mut out = Vec::new();
    for g in geometries {
        let top = orders.iter().copied().max().unwrap_or(1).max(1);
        let spectrum = build_spectrum(g, top)?;
        for &m in orders {
            let computed = spectrum.rows()[m].sigma;
            let mf = m as f64;
            let plateau = plateau_value(g);
            out.push(AsymptoticCheck {
                regime: Regime::Plateau,
                m,
                kappa0: g.kappa0(),
                kappa: g.kappa(),
                computed,
                predicted: plateau,
                deviation: (computed / plateau - 1.0).abs(),
                in_regime: g.kappa0() >= 10.0 * (mf * mf - 0.25).abs(),
            });
            if m >= 1 {
                let decay = decay_value(g, m);
                out.push(AsymptoticCheck {
                    regime: Regime::Decay,
                    m,
                    kappa0: g.kappa0(),
                    kappa: g.kappa(),
                    computed,
                    predicted: decay,
                    deviation: (computed / decay - 1.0).abs(),
                    in_regime: 4.0 * g.kappa() * g.kappa() <= mf + 1.0,
                });
            }
        }
    }
    Ok(out)
}

/// Smallest `kappa = kappa0` with a nonzero bandwidth, by bisection on
/// `[lo, hi]` to width `tol`.
pub fn zero_bandwidth_threshold(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let positive = |k: f64| -> Result<bool> {
        let g = ProblemGeometry::from_size_parameters(k, k)?;
        Ok(bandwidth::report(&g)?.bandwidth > 0)
    };
    if positive(lo)? || !positive(hi)? {
        return Err(IspError::InvalidArgument(format!(
            "bandwidth does not switch on inside [{lo}, {hi}]"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if positive(mid)? {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let c = SweepConfig::default();
        let g = c.grid();
        assert_eq!(g.len(), 300);
        assert_eq!(g[0], 2.0);
        assert_eq!(g[299], 100.0 * PI);
        assert!((g[1] - g[0] - (100.0 * PI - 2.0) / 299.0).abs() < 1e-12);
        assert!(run_sweep(&SweepConfig { n_points: 1, ..c }).is_err());
    }

    #[test]
    fn small_sweep_holds_the_sandwich() {
        let c = SweepConfig {
            n_points: 12,
            kappa_max: 60.0,
            ..SweepConfig::default()
        };
        let recs = run_sweep(&c).unwrap();
        let s = summarize(&recs);
        assert!(s.lower_violations.is_empty() && s.upper_violations.is_empty());
        assert_eq!(recs[0].bandwidth, 0);
        assert_eq!(recs[0].relerr_minus, 0.0);
    }

    #[test]
    fn relative_error_conventions() {
        assert_eq!(relative_error(-2, 10), 0.2);
        assert_eq!(relative_error(0, 0), 0.0);
        assert_eq!(relative_error(3, 0), f64::INFINITY);
    }

    #[test]
    fn exact_line_fit() {
        let recs: Vec<SweepRecord> = (0..5)
            .map(|i| {
                let kappa = i as f64 + 1.0;
                SweepRecord {
                    kappa,
                    kappa0: kappa,
                    bandwidth: 2 * i + 1,
                    lower: 0,
                    upper: 0,
                    lower_approx: 0,
                    upper_approx: 0,
                    eps_minus: 0,
                    eps_plus: 0,
                    relerr_minus: 0.0,
                    relerr_plus: 0.0,
                }
            })
            .collect();
        let f = fit_linear(&recs, RegressionTarget::Bandwidth).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13);
        assert!(f.mean_abs_error < 1e-13 && f.std_dev < 1e-13);
        assert!(fit_linear(&recs[..1], RegressionTarget::Bandwidth).is_err());
        let same: Vec<_> = recs
            .iter()
            .map(|r| SweepRecord { kappa: 1.0, ..*r })
            .collect();
        assert!(fit_linear(&same, RegressionTarget::Bandwidth).is_err());
    }

    #[test]
    fn radius_study() {
        let rows = r_independence_study(10.0 * PI, &[1.0, 2.0, 10.0]).unwrap();
        let direct = bandwidth::report(
            &ProblemGeometry::from_size_parameters(10.0 * PI, 10.0 * PI).unwrap(),
        )
        .unwrap();
        assert_eq!(rows[0].bandwidth, direct.bandwidth);
        assert!(rows[1].peak_log_sigma < rows[0].peak_log_sigma);
        assert!(rows[2].peak_log_sigma < rows[1].peak_log_sigma);
    }

    #[test]
    fn plateau_regime() {
        let g = ProblemGeometry::from_size_parameters(200.0 * PI, 200.0 * PI).unwrap();
        let checks = asymptotic_checks(&[g], &[0, 1, 2, 3, 4, 5]).unwrap();
        for c in checks.iter().filter(|c| c.regime == Regime::Plateau) {
            assert!(c.deviation < 0.05, "m = {}: {}", c.m, c.deviation);
        }
    }

    #[test]
    fn plateau_ignores_the_radius() {
        let a = ProblemGeometry::new(100.0, 3.0, 3.0).unwrap();
        let b = ProblemGeometry::new(100.0, 3.0, 30.0).unwrap();
        let sa = build_spectrum(&a, 2).unwrap().rows()[0].sigma;
        let sb = build_spectrum(&b, 2).unwrap().rows()[0].sigma;
        assert!((sa / sb - 1.0).abs() < 0.01);
        assert!((plateau_value(&a) - plateau_value(&b)).abs() == 0.0);
    }

    #[test]
    fn decay_regime() {
        let g = ProblemGeometry::from_size_parameters(0.5, 1.0).unwrap();
        let orders: Vec<usize> = (8..=16).collect();
        let checks = asymptotic_checks(&[g], &orders).unwrap();
        let dev: Vec<f64> = checks
            .iter()
            .filter(|c| c.regime == Regime::Decay)
            .map(|c| {
                assert!(c.in_regime);
                c.deviation
            })
            .collect();
        assert!(dev.iter().all(|&d| d < 0.25));
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    }

    #[test]
    fn threshold_between_known_sizes() {
        let t = zero_bandwidth_threshold(1.0, 3.0, 1e-3).unwrap();
        assert!(t > 1.7 && t < 2.7, "{t}");
        assert!(zero_bandwidth_threshold(3.0, 4.0, 1e-3).is_err());
    }
}
