//! Truncated-SVD inversion with the analytic singular system.
//!
//! Modes are kept by angular frequency, `|m| <= N`, symmetric in `m`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bandwidth;
use crate::error::{IspError, Result};
use crate::forward::{analytic_coefficients, BoundaryData, SourceField, SourceGrid};
use crate::geometry::ProblemGeometry;
use crate::singular::{build_spectrum, hankel_phases};
use crate::specfun::bessel_j_sequence;

/// `c_m = (U, phi_m)` for `m = -M ..= M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalCoefficients {
    geometry: ProblemGeometry,
    coefficients: Vec<Complex64>,
}

impl ModalCoefficients {
    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn max_mode(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// Coefficient of mode `m`, `None` outside `-M ..= M`.
    pub fn get(&self, m: i64) -> Option<Complex64> {
        let idx = m + self.max_mode() as i64;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.coefficients.get(i).copied())
    }

    /// Coefficients ordered from `-M` to `M`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Projects boundary samples onto `phi_m`, `|m| <= max_mode`, by the
/// trapezoid rule. Needs `N_s >= 2 M + 1` samples.
pub fn modal_decompose(data: &BoundaryData, max_mode: usize) -> Result<ModalCoefficients> {
    let n_s = data.len();
    let required = 2 * max_mode + 1;
    if n_s < required {
        return Err(IspError::Aliasing {
            samples: n_s,
            modes: max_mode,
            required,
        });
    }
    let g = *data.geometry();
    let phases = hankel_phases(&g, max_mode)?;
    // (2 pi R / N_s) * (2 pi R)^{-1/2}
    let weight = (2.0 * PI * g.r()).sqrt() / n_s as f64;
    let mm = max_mode as i64;
    let coefficients = (-mm..=mm)
        .zip(&phases)
        .map(|(m, &phase)| {
            let step = Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n_s as f64);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in data.values().iter().enumerate() {
                // re-anchor the rotation now and then to keep it unimodular
                if j % 64 == 0 {
                    rot =
                        Complex64::from_polar(1.0, -2.0 * PI * (m * j as i64) as f64 / n_s as f64);
                }
                acc += v * rot;
                rot *= step;
            }
            acc * Complex64::from_polar(weight, -phase)
        })
        .collect();
    Ok(ModalCoefficients {
        geometry: g,
        coefficients,
    })
}

/// Which truncation index to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationPolicy {
    /// The bandwidth itself.
    Bandwidth,
    /// The lower bound from the zeros of `J_m`.
    Lower,
    /// The upper bound from the zeros of `Y_m`.
    Upper,
    Manual(i64),
}

impl fmt::Display for TruncationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationPolicy::Bandwidth => write!(f, "B"),
            TruncationPolicy::Lower => write!(f, "B-"),
            TruncationPolicy::Upper => write!(f, "B+"),
            TruncationPolicy::Manual(n) => write!(f, "N={n}"),
        }
    }
}

impl FromStr for TruncationPolicy {
    type Err = IspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" => Ok(Self::Bandwidth),
            "B-" => Ok(Self::Lower),
            "B+" => Ok(Self::Upper),
            other => other
                .strip_prefix("N=")
                .and_then(|n| n.parse().ok())
                .map(Self::Manual)
                .ok_or_else(|| IspError::InvalidArgument(format!("unknown policy {other:?}"))),
        }
    }
}

/// Truncation index for a policy.
pub fn pick_truncation(g: &ProblemGeometry, policy: TruncationPolicy) -> Result<usize> {
    match policy {
        TruncationPolicy::Bandwidth => Ok(bandwidth::report(g)?.bandwidth),
        TruncationPolicy::Lower => bandwidth::bound_lower(g.kappa0()),
        TruncationPolicy::Upper => bandwidth::bound_upper(g.kappa0()),
        TruncationPolicy::Manual(n) => usize::try_from(n).map_err(|_| {
            IspError::InvalidArgument(format!("truncation must be nonnegative, got {n}"))
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub source: SourceField,
    pub truncation: usize,
    /// Relative misfit between the data coefficients and those of the
    /// reconstruction pushed forward, over `|m| <= truncation`.
    pub residual: f64,
}

/// `s = sum_{|m| <= N} c_m psi_m / sigma_m` sampled on `grid`.
pub fn tsvd_reconstruct(
    coeffs: &ModalCoefficients,
    truncation: usize,
    grid: &SourceGrid,
) -> Result<Reconstruction> {
    let g = *coeffs.geometry();
    if grid.geometry() != &g {
        return Err(IspError::InvalidArgument(
            "grid and data geometries differ".into(),
        ));
    }
    if truncation > coeffs.max_mode() {
        return Err(IspError::InvalidArgument(format!(
            "truncation {truncation} exceeds the {} decomposed modes",
            coeffs.max_mode()
        )));
    }
    let spectrum = build_spectrum(&g, truncation.max(1))?;
    let j0 = bessel_j_sequence(truncation + 1, g.kappa0())?;
    // ln of sqrt(pi) R0 A_m sigma_m, the divisor of J_m(k rho) c_m
    let mut ln_div = Vec::with_capacity(truncation + 1);
    for n in 0..=truncation {
        let ln_a = crate::singular::ln_a_from_sequence(&j0, n)?;
        if ln_a == f64::NEG_INFINITY {
            return Err(IspError::DegenerateMode { mode: n as i64 });
        }
        let ls = spectrum.rows()[n].log_sigma;
        if ls.is_nan() || ls <= f64::MIN_POSITIVE.ln() {
            return Err(IspError::SigmaUnderflow { mode: n as i64 });
        }
        ln_div.push(0.5 * PI.ln() + g.r0().ln() + ln_a + ls);
    }

    let nt = grid.n_theta();
    let nn = truncation as i64;
    let mut values = Vec::with_capacity(grid.len());
    for &rho in grid.radii() {
        let j = bessel_j_sequence(truncation, g.k() * rho)?;
        // radial amplitude per mode, then an angular synthesis
        let amps: Vec<Complex64> = (-nn..=nn)
            .map(|m| {
                let n = m.unsigned_abs() as usize;
                let r = crate::singular::radial_from_sequence(&j, m, ln_div[n]);
                coeffs.get(m).expect("within range") * r
            })
            .collect();
        for t in 0..nt {
            let th = grid.theta(t);
            let step = Complex64::from_polar(1.0, th);
            let mut rot = Complex64::from_polar(1.0, -(nn as f64) * th);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in &amps {
                acc += a * rot;
                rot *= step;
            }
            values.push(acc);
        }
    }
    let source = SourceField::new(grid.clone(), values)?;
    let residual = retained_residual(&source, coeffs, truncation)?;
    Ok(Reconstruction {
        source,
        truncation,
        residual,
    })
}

/// `|| sigma_m (s, psi_m) - c_m || / || c_m ||` over `|m| <= truncation`,
/// with the inner products taken by the grid quadrature.
fn retained_residual(
    s: &SourceField,
    coeffs: &ModalCoefficients,
    truncation: usize,
) -> Result<f64> {
    let pushed = analytic_coefficients(s, truncation)?;
    let g = s.grid().geometry();
    let phases = hankel_phases(g, truncation)?;
    let norm = (2.0 * PI * g.r()).sqrt();
    let nn = truncation as i64;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((m, p), phase) in (-nn..=nn).zip(&pushed).zip(&phases) {
        // pushed carries the factor of phi_m; strip it to compare with c_m
        let back = p * Complex64::from_polar(norm, -phase);
        let c = coeffs.get(m).expect("within range");
        num += (back - c).norm_sqr();
        den += c.norm_sqr();
    }
    Ok(if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{apply_forward_analytic, assemble_forward, synthesize_measurement};
    use crate::singular::phi_eval;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sampled_phi(g: &ProblemGeometry, m: i64, n_s: usize) -> BoundaryData {
        let values = (0..n_s)
            .map(|j| phi_eval(m, g, 2.0 * PI * j as f64 / n_s as f64).unwrap())
            .collect();
        BoundaryData::new(g, values, 0.0).unwrap()
    }

    #[test]
    fn left_vectors_decompose_to_unit_vectors() {
        let g = ProblemGeometry::from_size_parameters(7.0, 9.0).unwrap();
        let coeffs = modal_decompose(&sampled_phi(&g, 7, 64), 20).unwrap();
        for m in -20i64..=20 {
            let want = if m == 7 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((coeffs.get(m).unwrap() - want).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn aliasing_guard() {
        let g = ProblemGeometry::from_size_parameters(7.0, 9.0).unwrap();
        assert!(matches!(
            modal_decompose(&sampled_phi(&g, 0, 40), 20),
            Err(IspError::Aliasing { required: 41, .. })
        ));
    }

    #[test]
    fn decomposition_is_linear() {
        let g = ProblemGeometry::from_size_parameters(3.0, 4.0).unwrap();
        let u1 = sampled_phi(&g, 2, 50);
        let u2 = BoundaryData::new(
            &g,
            (0..50)
                .map(|j| c((j as f64).sin(), 0.3 * j as f64))
                .collect(),
            0.0,
        )
        .unwrap();
        let (a, b) = (c(0.3, -1.2), c(2.0, 0.5));
        let mix = BoundaryData::new(
            &g,
            u1.values()
                .iter()
                .zip(u2.values())
                .map(|(x, y)| a * x + b * y)
                .collect(),
            0.0,
        )
        .unwrap();
        let (d1, d2, dm) = (
            modal_decompose(&u1, 12).unwrap(),
            modal_decompose(&u2, 12).unwrap(),
            modal_decompose(&mix, 12).unwrap(),
        );
        for m in -12i64..=12 {
            let want = a * d1.get(m).unwrap() + b * d2.get(m).unwrap();
            assert!((dm.get(m).unwrap() - want).norm() < 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn singular_triple_through_data() {
        let g = ProblemGeometry::from_size_parameters(10.0, 12.0).unwrap();
        let grid = SourceGrid::new(&g, 48, 64).unwrap();
        let s = SourceField::from_modes(grid, &[(3, c(1.0, 0.0))]).unwrap();
        let u = apply_forward_analytic(&s, 25, 64).unwrap();
        let coeffs = modal_decompose(&u, 25).unwrap();
        let sigma3 = build_spectrum(&g, 25).unwrap().rows()[3].sigma;
        for m in -25i64..=25 {
            let want = if m == 3 { sigma3 } else { 0.0 };
            assert!(
                (coeffs.get(m).unwrap() - want).norm() < 1e-8 * sigma3,
                "m = {m}"
            );
        }
    }

    fn two_mode_case() -> (ProblemGeometry, SourceGrid, SourceField, ModalCoefficients) {
        let g = ProblemGeometry::from_size_parameters(10.0, 10.0).unwrap();
        let grid = SourceGrid::new(&g, 40, 64).unwrap();
        let s =
            SourceField::from_modes(grid.clone(), &[(2, c(1.0, 0.0)), (-9, c(0.5, 0.0))]).unwrap();
        let u = apply_forward_analytic(&s, 20, 64).unwrap();
        let coeffs = modal_decompose(&u, 20).unwrap();
        (g, grid, s, coeffs)
    }

    #[test]
    fn exact_inversion_of_band_limited_data() {
        let (_, grid, s, coeffs) = two_mode_case();
        for n in [9, 12, 20] {
            let rec = tsvd_reconstruct(&coeffs, n, &grid).unwrap();
            assert!(rec.source.distance(&s) / s.norm() < 1e-6, "N = {n}");
            assert!(rec.residual < 1e-8, "N = {n}: {}", rec.residual);
        }
    }

    #[test]
    fn truncation_projects() {
        let (_, grid, s, coeffs) = two_mode_case();
        let rec = tsvd_reconstruct(&coeffs, 5, &grid).unwrap();
        let err = rec.source.distance(&s) / s.norm();
        assert!((err - 0.5 / 1.25f64.sqrt()).abs() < 1e-6, "{err}");
        let round =
            modal_decompose(&apply_forward_analytic(&rec.source, 20, 64).unwrap(), 20).unwrap();
        for m in -20i64..=20 {
            let want = if m.abs() <= 5 {
                coeffs.get(m).unwrap()
            } else {
                c(0.0, 0.0)
            };
            assert!((round.get(m).unwrap() - want).norm() < 1e-8, "m = {m}");
        }
    }

    #[test]
    fn manual_zero_keeps_only_the_constant_mode() {
        let (g, grid, _, _) = two_mode_case();
        let s =
            SourceField::from_modes(grid.clone(), &[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]).unwrap();
        let coeffs = modal_decompose(&apply_forward_analytic(&s, 4, 16).unwrap(), 4).unwrap();
        let n = pick_truncation(&g, TruncationPolicy::Manual(0)).unwrap();
        let rec = tsvd_reconstruct(&coeffs, n, &grid).unwrap();
        let psi0 = SourceField::from_modes(grid, &[(0, c(1.0, 0.0))]).unwrap();
        assert!(rec.source.distance(&psi0) < 1e-8);
    }

    #[test]
    fn policies() {
        let g = ProblemGeometry::from_size_parameters(10.0 * PI, 10.0 * PI).unwrap();
        assert_eq!(pick_truncation(&g, TruncationPolicy::Lower).unwrap(), 26);
        assert_eq!(
            pick_truncation(&g, TruncationPolicy::Bandwidth).unwrap(),
            27
        );
        assert_eq!(pick_truncation(&g, TruncationPolicy::Upper).unwrap(), 29);
        assert!(pick_truncation(&g, TruncationPolicy::Manual(-1)).is_err());
        for p in ["B", "B-", "B+", "N=12"] {
            assert_eq!(p.parse::<TruncationPolicy>().unwrap().to_string(), p);
        }
        assert!("X".parse::<TruncationPolicy>().is_err());
    }

    #[test]
    fn underflowing_sigma_is_reported() {
        // sigma_m ~ 10^-m here
        let g = ProblemGeometry::from_size_parameters(0.1, 1.0).unwrap();
        let grid = SourceGrid::new(&g, 4, 8).unwrap();
        let data = BoundaryData::new(&g, vec![c(1.0, 0.0); 801], 0.0).unwrap();
        let coeffs = modal_decompose(&data, 400).unwrap();
        match tsvd_reconstruct(&coeffs, 400, &grid) {
            Err(IspError::SigmaUnderflow { mode }) => assert!(mode > 250 && mode < 400, "{mode}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matches_matrix_tsvd() {
        let g = ProblemGeometry::from_size_parameters(4.0, 4.0).unwrap();
        let f = assemble_forward(&g, 64, 128, 128).unwrap();
        let grid = f.grid().clone();
        let s = SourceField::from_fn(grid.clone(), |rho, th| {
            c(
                (-(rho * rho) * 4.0).exp() * (1.0 + 0.5 * th.cos()),
                rho * (3.0 * th).sin(),
            )
        });
        let n = 5;
        let data = apply_forward_analytic(&s, 60, 128).unwrap();
        let analytic = tsvd_reconstruct(&modal_decompose(&data, 60).unwrap(), n, &grid).unwrap();
        let matrix = f.tsvd_solve(&data, 2 * n + 1).unwrap();
        let err = analytic.source.distance(&matrix) / analytic.source.norm();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn noise_grows_past_the_band() {
        let g = ProblemGeometry::from_size_parameters(10.0 * PI, 10.0 * PI).unwrap();
        let grid = SourceGrid::new(&g, 48, 128).unwrap();
        let s =
            SourceField::from_modes(grid.clone(), &[(2, c(1.0, 0.0)), (-9, c(0.5, 0.0))]).unwrap();
        let data = synthesize_measurement(&s, 60, 256, 1e-2, 11).unwrap();
        let coeffs = modal_decompose(&data, 60).unwrap();
        let err = |n| {
            tsvd_reconstruct(&coeffs, n, &grid)
                .unwrap()
                .source
                .distance(&s)
        };
        let (lo, up) = (err(26), err(29 + 10));
        assert!(up > lo, "{lo} {up}");
    }
}
