//! Closed-form singular system of the source-to-boundary operator with
//! kernel `H_0^(1)(k |x - y|)`.
//!
//! For every angular frequency `m`
//!
//! ```text
//! sigma_m = sqrt(2R) pi R0 |H_m(kR)| A_m(kR0)
//! psi_m(y) = J_m(k|y|) e^{i m arg y} / (sqrt(pi) R0 A_m(kR0))
//! phi_m(x) = e^{i arg H_m(kR)} e^{i m arg x} / sqrt(2 pi R)
//! A_m(t) = sqrt(J_m(t)^2 - J_{m-1}(t) J_{m+1}(t))
//! ```
//!
//! Everything that can leave the `f64` range is carried as a logarithm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IspError, Result};
use crate::geometry::ProblemGeometry;
use crate::specfun::{self, bessel_j_sequence, bessel_y_sequence, BesselSequence};

/// Round-off allowance on the radicand of `A_m^2`, relative to its terms.
const RADICAND_SLACK: f64 = 1e-14;

/// Horizon used when the caller does not pick one.
pub fn default_horizon(kappa0: f64) -> usize {
    kappa0.ceil() as usize + (3.0 * kappa0.cbrt()).ceil() as usize + 40
}

/// `ln A_m(x)` from a `J` sequence at `x` that reaches order `m + 1`.
pub(crate) fn ln_a_from_sequence(j: &BesselSequence, m: usize) -> Result<f64> {
    let x = j.argument();
    let lj = j.ln_abs(m);
    let lnext = j.ln_abs(m + 1);
    // J_{m-1} J_{m+1}; for m = 0 this is -J_1^2.
    let (lprod, sprod) = if m == 0 {
        (2.0 * lnext, -1.0)
    } else {
        (j.ln_abs(m - 1) + lnext, j.signum(m - 1) * j.signum(m + 1))
    };
    let s = (2.0 * lj).max(lprod);
    if s == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sq = (2.0 * lj - s).exp();
    let pr = sprod * (lprod - s).exp();
    let radicand = sq - pr;
    let slack = RADICAND_SLACK * sq.max(pr.abs());
    if radicand < -slack {
        return Err(IspError::NegativeRadicand {
            order: m as i64,
            kappa0: x,
            value: radicand,
        });
    }
    if radicand <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(0.5 * (s + radicand.ln()))
}

/// `ln A_|m|(kappa0)`; `-inf` when the mode is degenerate.
pub fn ln_a_m(m: i64, kappa0: f64) -> Result<f64> {
    if !(kappa0.is_finite() && kappa0 > 0.0) {
        return Err(IspError::domain("kappa0", kappa0, "must be positive"));
    }
    let n = m.unsigned_abs() as usize;
    let j = bessel_j_sequence(n + 1, kappa0)?;
    ln_a_from_sequence(&j, n)
}

/// `A_m(kappa0) = sqrt(J_m^2 - J_{m-1} J_{m+1})`, even in `m`. Underflows to
/// zero deep in the stopband; use [`ln_a_m`] there.
pub fn a_m(m: i64, kappa0: f64) -> Result<f64> {
    Ok(ln_a_m(m, kappa0)?.exp())
}

/// `ln sigma_|m|` for the geometry; `-inf` for a degenerate mode.
pub fn log_sigma(m: i64, g: &ProblemGeometry) -> Result<f64> {
    let n = m.unsigned_abs();
    let ln_h2 = specfun::log_hankel_abs2(n as u32, g.kappa())?;
    let ln_a = ln_a_m(m, g.kappa0())?;
    Ok(sigma_prefactor(g) + 0.5 * ln_h2 + ln_a)
}

fn sigma_prefactor(g: &ProblemGeometry) -> f64 {
    0.5 * (2.0 * g.r()).ln() + PI.ln() + g.r0().ln()
}

/// One row of the spectrum, natural logarithms throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub m: usize,
    pub a_m: f64,
    pub log_abs_h2: f64,
    pub log_sigma: f64,
    /// `exp(log_sigma)`, zero once that underflows.
    pub sigma: f64,
}

/// Singular values for `m = 0 ..= m_max` of one geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    geometry: ProblemGeometry,
    rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn rows(&self) -> &[SpectrumRow] {
        &self.rows
    }

    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }

    /// Row for `|m|`, if inside the horizon.
    pub fn row(&self, m: i64) -> Option<&SpectrumRow> {
        self.rows.get(m.unsigned_abs() as usize)
    }

    pub fn log_sigma(&self, m: i64) -> Option<f64> {
        self.row(m).map(|r| r.log_sigma)
    }

    /// Largest singular value and the order where it is attained.
    pub fn peak(&self) -> (usize, f64) {
        self.rows.iter().fold((0, f64::NEG_INFINITY), |best, r| {
            if r.log_sigma > best.1 {
                (r.m, r.log_sigma)
            } else {
                best
            }
        })
    }
}

/// Builds the spectrum for `m = 0 ..= m_max` from one J sequence at `kappa0`
/// and one J/Y pair at `kappa`.
pub fn build_spectrum(g: &ProblemGeometry, m_max: usize) -> Result<SpectrumTable> {
    if m_max < 1 {
        return Err(IspError::InvalidArgument(
            "spectrum horizon must be at least 1".into(),
        ));
    }
    let j0 = bessel_j_sequence(m_max + 1, g.kappa0())?;
    let jk = bessel_j_sequence(m_max, g.kappa())?;
    let yk = bessel_y_sequence(m_max, g.kappa())?;
    let pre = sigma_prefactor(g);
    let mut rows = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let ln_a = ln_a_from_sequence(&j0, m)?;
        let log_abs_h2 = specfun::ln_sum_squares(jk.scaled(m), yk.scaled(m));
        let log_sigma = pre + 0.5 * log_abs_h2 + ln_a;
        rows.push(SpectrumRow {
            m,
            a_m: ln_a.exp(),
            log_abs_h2,
            log_sigma,
            sigma: log_sigma.exp(),
        });
    }
    log::debug!(
        "spectrum kappa0={} kappa={} rows={}",
        g.kappa0(),
        g.kappa(),
        rows.len()
    );
    Ok(SpectrumTable { geometry: *g, rows })
}

/// Right singular function `psi_m` at the polar point `(rho, theta)` of the
/// source disk.
pub fn psi_eval(m: i64, g: &ProblemGeometry, rho: f64, theta: f64) -> Result<Complex64> {
    if !(rho.is_finite() && rho >= 0.0 && rho <= g.r0() * (1.0 + 1e-12)) {
        return Err(IspError::domain(
            "rho",
            rho,
            "point must lie in the source disk",
        ));
    }
    let ln_a = ln_a_m(m, g.kappa0())?;
    if ln_a == f64::NEG_INFINITY {
        return Err(IspError::DegenerateMode { mode: m });
    }
    let radial = psi_radial(m, g, rho, ln_a)?;
    Ok(Complex64::from_polar(1.0, m as f64 * theta) * radial)
}

/// `J_m(k rho) / (sqrt(pi) R0 A_m)` evaluated through logarithms.
pub(crate) fn psi_radial(m: i64, g: &ProblemGeometry, rho: f64, ln_a: f64) -> Result<f64> {
    let norm = 0.5 * PI.ln() + g.r0().ln() + ln_a;
    if rho == 0.0 {
        return Ok(if m == 0 { (-norm).exp() } else { 0.0 });
    }
    let n = m.unsigned_abs() as usize;
    let j = bessel_j_sequence(n, g.k() * rho)?;
    Ok(radial_from_sequence(&j, m, norm))
}

pub(crate) fn radial_from_sequence(j: &BesselSequence, m: i64, norm: f64) -> f64 {
    let n = m.unsigned_abs() as usize;
    let mut sign = j.signum(n);
    if m < 0 && n % 2 == 1 {
        sign = -sign;
    }
    if sign == 0.0 {
        return 0.0;
    }
    sign * (j.ln_abs(n) - norm).exp()
}

/// Left singular function `phi_m` at angle `theta` on the measurement circle.
pub fn phi_eval(m: i64, g: &ProblemGeometry, theta: f64) -> Result<Complex64> {
    let phase = specfun::hankel_phase(m, g.kappa())?;
    Ok(Complex64::from_polar(
        (2.0 * PI * g.r()).sqrt().recip(),
        phase + m as f64 * theta,
    ))
}

/// `arg H_m(kR)` for `m = -m_max ..= m_max`, indexed by `m + m_max`.
pub(crate) fn hankel_phases(g: &ProblemGeometry, m_max: usize) -> Result<Vec<f64>> {
    let j = bessel_j_sequence(m_max, g.kappa())?;
    let y = bessel_y_sequence(m_max, g.kappa())?;
    let mm = m_max as i64;
    Ok((-mm..=mm)
        .map(|m| specfun::phase_from_sequences(m, &j, &y))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_adaptive, GaussLegendre};
    use crate::specfun::bessel_j;

    fn a_second_form(m: u32, x: f64) -> f64 {
        let jm = bessel_j(m, x).unwrap();
        let jn = bessel_j(m + 1, x).unwrap();
        (jm * jm + jn * jn - 2.0 * m as f64 / x * jm * jn).sqrt()
    }

    #[test]
    fn both_forms_of_a_agree() {
        for &x in &[0.7, 4.0, 10.0 * PI, 100.0] {
            for m in [0u32, 1, 3, 10, 25, 40] {
                let a = a_m(m as i64, x).unwrap();
                let b = a_second_form(m, x);
                assert!(((a - b) / b).abs() < 1e-12, "m = {m}, x = {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn difference_identity() {
        for &x in &[1.5, 10.0 * PI, 77.0] {
            for m in 0..60i64 {
                let lhs = a_m(m, x).unwrap().powi(2) - a_m(m + 1, x).unwrap().powi(2);
                let jm = bessel_j(m as u32, x).unwrap();
                let jn = bessel_j(m as u32 + 1, x).unwrap();
                let rhs = 2.0 / x * jm * jn;
                // rounding is relative to the operands, not to the difference
                let scale = jm * jm + jn * jn;
                assert!((lhs - rhs).abs() <= 1e-13 * scale, "m = {m}, x = {x}");
            }
        }
    }

    #[test]
    fn a_is_even_in_m() {
        for m in 1..20 {
            assert_eq!(a_m(m, 12.3).unwrap(), a_m(-m, 12.3).unwrap());
        }
    }

    #[test]
    fn a_squared_is_a_radial_integral() {
        let g = ProblemGeometry::new(3.0, 2.0, 2.5).unwrap();
        for m in [0u32, 2, 7, 12] {
            let (integral, _) = integrate_adaptive(
                |rho| {
                    let j = bessel_j(m, g.k() * rho).unwrap();
                    rho * j * j
                },
                0.0,
                g.r0(),
                1e-13,
            )
            .unwrap();
            let want = 0.5 * g.r0().powi(2) * a_m(m as i64, g.kappa0()).unwrap().powi(2);
            assert!(((integral - want) / want).abs() < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn ln_a_stays_finite_far_into_the_stopband() {
        let v = ln_a_m(2000, 3.0).unwrap();
        assert!(v.is_finite() && v < -5000.0);
        assert_eq!(a_m(2000, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn log_sigma_is_even_and_matches_table() {
        let g = ProblemGeometry::from_size_parameters(10.0, 25.0).unwrap();
        let t = build_spectrum(&g, 40).unwrap();
        for m in 0..=40i64 {
            let direct = log_sigma(m, &g).unwrap();
            assert_eq!(direct, log_sigma(-m, &g).unwrap());
            assert!((direct - t.log_sigma(m).unwrap()).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn smallest_table() {
        let g = ProblemGeometry::from_size_parameters(1.0, 1.0).unwrap();
        assert_eq!(build_spectrum(&g, 1).unwrap().rows().len(), 2);
        assert!(build_spectrum(&g, 0).is_err());
    }

    #[test]
    fn order_zero_brackets_the_transition() {
        // A zero of mu -> J_mu(kappa0) inside [m, m+1] shows as a sign change.
        for &x in &[10.0 * PI, 31.7, 100.0, 100.0 * PI] {
            let j = bessel_j_sequence(202, x).unwrap();
            let mut seen = 0;
            for m in 0..=200usize {
                if j.signum(m) * j.signum(m + 1) <= 0.0 {
                    seen += 1;
                    let a = ln_a_from_sequence(&j, m).unwrap();
                    let b = ln_a_from_sequence(&j, m + 1).unwrap();
                    assert!(a <= b, "x = {x}, m = {m}");
                }
            }
            assert!(seen > 0);
        }
    }

    fn polar_inner(g: &ProblemGeometry, m: i64, n: i64, nr: usize, nt: usize) -> Complex64 {
        let rule = GaussLegendre::new(nr);
        let mut acc = Complex64::new(0.0, 0.0);
        for (rho, w) in rule.on_interval(0.0, g.r0()) {
            for i in 0..nt {
                let th = 2.0 * PI * i as f64 / nt as f64;
                let a = psi_eval(m, g, rho, th).unwrap();
                let b = psi_eval(n, g, rho, th).unwrap();
                acc += a * b.conj() * rho * w * 2.0 * PI / nt as f64;
            }
        }
        acc
    }

    #[test]
    fn psi_orthonormal() {
        let g = ProblemGeometry::from_size_parameters(6.0, 9.0).unwrap();
        for m in [-4i64, 0, 3, 11] {
            assert!(
                (polar_inner(&g, m, m, 40, 48).re - 1.0).abs() < 1e-8,
                "m = {m}"
            );
        }
        assert!(polar_inner(&g, 2, 5, 40, 48).norm() < 1e-8);
        assert!(polar_inner(&g, -3, 3, 40, 48).norm() < 1e-8);
    }

    #[test]
    fn psi_at_origin() {
        let g = ProblemGeometry::from_size_parameters(5.0, 5.0).unwrap();
        let want = 1.0 / (PI.sqrt() * g.r0() * a_m(0, 5.0).unwrap());
        assert!((psi_eval(0, &g, 0.0, 0.3).unwrap().re - want).abs() < 1e-14 * want);
        assert_eq!(psi_eval(4, &g, 0.0, 0.3).unwrap().norm(), 0.0);
        assert!(psi_eval(0, &g, 1.5, 0.0).is_err());
    }

    #[test]
    fn psi_stays_finite_deep_in_the_stopband() {
        // A_400(1e-3) is far below the f64 range, the ratio is not.
        let g = ProblemGeometry::new(1.0, 1e-3, 1.0).unwrap();
        let edge = psi_eval(400, &g, 1e-3, 0.0).unwrap().re;
        assert!(edge.is_finite() && edge > 0.0);
        let inner = psi_eval(400, &g, 0.5e-3, 0.0).unwrap().re;
        assert!(inner < edge * 1e-100);
    }

    #[test]
    fn phi_orthonormal_on_circle() {
        let g = ProblemGeometry::from_size_parameters(8.0, 11.0).unwrap();
        let pairs = [(0i64, 0i64), (3, 3), (-7, -7), (2, 5), (-4, 4)];
        for (m, n) in pairs {
            let nt = 2 * (m.abs() + n.abs()) as usize + 8;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..nt {
                let th = 2.0 * PI * i as f64 / nt as f64;
                let a = phi_eval(m, &g, th).unwrap();
                assert!((a.norm() - (2.0 * PI * g.r()).sqrt().recip()).abs() < 1e-15);
                acc += a * phi_eval(n, &g, th).unwrap().conj() * g.r() * 2.0 * PI / nt as f64;
            }
            let want = if m == n { 1.0 } else { 0.0 };
            assert!((acc - want).norm() < 1e-12, "({m}, {n}): {acc}");
        }
    }

    #[test]
    fn singular_triple_through_addition_theorem() {
        let kappa = 10.0 * PI;
        let g = ProblemGeometry::from_size_parameters(kappa, kappa).unwrap();
        let nr = 60;
        let nt = 256;
        let rule = GaussLegendre::new(nr);
        let radial: Vec<(f64, f64)> = rule.on_interval(0.0, g.r0()).collect();
        let table = build_spectrum(&g, 100).unwrap();
        for m in [0i64, 1, 5, 17, 27, 30] {
            let vmax = m.abs() + 60;
            let jk = bessel_j_sequence(vmax as usize, kappa).unwrap();
            let yk = bessel_y_sequence(vmax as usize, kappa).unwrap();
            let hank = |nu: i64| {
                let n = nu.unsigned_abs() as usize;
                let s = if nu < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
                Complex64::new(s * jk.value(n), s * yk.value(n))
            };
            // sum over source nodes of the Graf kernel times psi_m
            let ln_a = ln_a_m(m, g.kappa0()).unwrap();
            let mut rows = Vec::new();
            for &(rho, w) in &radial {
                let jr = bessel_j_sequence(vmax as usize, g.k() * rho).unwrap();
                let p = psi_radial(m, &g, rho, ln_a).unwrap();
                rows.push((rho, w, jr, p));
            }
            // angular quadrature of psi_m against each Graf term, per radius
            let mut moments = Vec::new();
            for (_, _, _, p) in &rows {
                let per_nu: Vec<Complex64> = (-vmax..=vmax)
                    .map(|nu| {
                        (0..nt)
                            .map(|i| {
                                let ty = 2.0 * PI * i as f64 / nt as f64;
                                Complex64::from_polar(*p, (m - nu) as f64 * ty)
                            })
                            .sum::<Complex64>()
                            * (2.0 * PI / nt as f64)
                    })
                    .collect();
                moments.push(per_nu);
            }
            for t in 0..16 {
                let tx = 2.0 * PI * t as f64 / 16.0 + 0.1;
                let mut acc = Complex64::new(0.0, 0.0);
                for ((rho, w, jr, _), per_nu) in rows.iter().zip(&moments) {
                    for (nu, mom) in (-vmax..=vmax).zip(per_nu) {
                        let term = hank(nu) * bessel_j_signed_from(jr, nu);
                        acc += term * Complex64::from_polar(1.0, nu as f64 * tx) * mom * rho * w;
                    }
                }
                let want = table.row(m).unwrap().sigma * phi_eval(m, &g, tx).unwrap();
                assert!((acc - want).norm() < 1e-6 * want.norm(), "m = {m}, t = {t}");
            }
        }
    }

    fn bessel_j_signed_from(j: &BesselSequence, nu: i64) -> f64 {
        let n = nu.unsigned_abs() as usize;
        let v = j.value(n);
        if nu < 0 && n % 2 == 1 {
            -v
        } else {
            v
        }
    }
}
