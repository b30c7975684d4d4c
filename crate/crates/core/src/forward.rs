//! Sources on a polar grid, boundary data on the measurement circle, and the
//! two discretisations of the forward operator: a weighted kernel matrix and
//! the analytic modal expansion.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IspError, Result};
use crate::geometry::ProblemGeometry;
use crate::quadrature::GaussLegendre;
use crate::singular::{build_spectrum, hankel_phases, ln_a_from_sequence};
use crate::specfun::{self, bessel_j_sequence, bessel_y_sequence};

const TWO_OVER_PI: f64 = 2.0 / PI;

/// Gauss–Legendre radii on `(0, R0)` times `n_theta` uniform angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceGrid {
    geometry: ProblemGeometry,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    n_theta: usize,
}

impl SourceGrid {
    pub fn new(geometry: &ProblemGeometry, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r == 0 || n_theta == 0 {
            return Err(IspError::InvalidArgument(
                "source grid must be non-empty".into(),
            ));
        }
        let rule = GaussLegendre::new(n_r);
        let (radii, radial_weights) = rule.on_interval(0.0, geometry.r0()).unzip();
        Ok(Self {
            geometry: *geometry,
            radii,
            radial_weights,
            n_theta,
        })
    }

    /// Grid from explicit radii and weights, as read back from a file.
    pub fn from_parts(
        geometry: &ProblemGeometry,
        radii: Vec<f64>,
        radial_weights: Vec<f64>,
        n_theta: usize,
    ) -> Result<Self> {
        if radii.len() != radial_weights.len() || radii.is_empty() || n_theta == 0 {
            return Err(IspError::InvalidArgument("inconsistent source grid".into()));
        }
        Ok(Self {
            geometry: *geometry,
            radii,
            radial_weights,
            n_theta,
        })
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn n_r(&self) -> usize {
        self.radii.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// Area weight `rho_i w_i 2 pi / n_theta` of node `(i, j)`; independent of `j`.
    pub fn area_weight(&self, i: usize) -> f64 {
        self.radii[i] * self.radial_weights[i] * 2.0 * PI / self.n_theta as f64
    }

    /// Flat index of node `(i_r, i_theta)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }
}

/// Complex samples of a source on a [`SourceGrid`], row-major in radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceField {
    grid: SourceGrid,
    values: Vec<Complex64>,
}

impl SourceField {
    pub fn new(grid: SourceGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(IspError::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SourceGrid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    /// Samples `f(rho, theta)` at every node.
    pub fn from_fn<F: FnMut(f64, f64) -> Complex64>(grid: SourceGrid, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &rho in grid.radii() {
            for j in 0..grid.n_theta() {
                values.push(f(rho, grid.theta(j)));
            }
        }
        Self { grid, values }
    }

    /// `sum_m c_m psi_m` sampled on the grid.
    pub fn from_modes(grid: SourceGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let g = *grid.geometry();
        let top = modes
            .iter()
            .map(|(m, _)| m.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let j0 = bessel_j_sequence(top + 1, g.kappa0())?;
        let mut norms = Vec::with_capacity(modes.len());
        for &(m, _) in modes {
            let ln_a = ln_a_from_sequence(&j0, m.unsigned_abs() as usize)?;
            if ln_a == f64::NEG_INFINITY {
                return Err(IspError::DegenerateMode { mode: m });
            }
            norms.push(0.5 * PI.ln() + g.r0().ln() + ln_a);
        }
        let mut field = Self::zeros(grid);
        for i in 0..field.grid.n_r() {
            let j = bessel_j_sequence(top, g.k() * field.grid.radii[i])?;
            for (&(m, c), &norm) in modes.iter().zip(&norms) {
                let radial = crate::singular::radial_from_sequence(&j, m, norm);
                for t in 0..field.grid.n_theta() {
                    let th = field.grid.theta(t);
                    let idx = field.grid.index(i, t);
                    field.values[idx] += c * Complex64::from_polar(radial, m as f64 * th);
                }
            }
        }
        Ok(field)
    }

    pub fn grid(&self) -> &SourceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    /// `L^2(D0)` inner product `(self, other)` by the grid quadrature.
    pub fn inner(&self, other: &SourceField) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.grid.n_r() {
            let w = self.grid.area_weight(i);
            let row = i * self.grid.n_theta..(i + 1) * self.grid.n_theta;
            let s: Complex64 = self.values[row.clone()]
                .iter()
                .zip(&other.values[row])
                .map(|(a, b)| a * b.conj())
                .sum();
            acc += s * w;
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `L^2(D0)` norm of `self - other`, grids assumed equal.
    pub fn distance(&self, other: &SourceField) -> f64 {
        let diff: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        SourceField {
            grid: self.grid.clone(),
            values: diff,
        }
        .norm()
    }

    /// Angular Fourier moments `(2 pi / n_theta) sum_j s(i, j) e^{-i m theta_j}`
    /// for `m = -m_max ..= m_max`, one vector per radius.
    pub(crate) fn angular_moments(&self, m_max: usize) -> Vec<Vec<Complex64>> {
        let nt = self.grid.n_theta();
        let mm = m_max as i64;
        let dth = 2.0 * PI / nt as f64;
        (0..self.grid.n_r())
            .map(|i| {
                let row = &self.values[i * nt..(i + 1) * nt];
                (-mm..=mm)
                    .map(|m| {
                        let step = Complex64::from_polar(1.0, -(m as f64) * dth);
                        let mut rot = Complex64::new(1.0, 0.0);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for v in row {
                            acc += v * rot;
                            rot *= step;
                        }
                        acc * dth
                    })
                    .collect()
            })
            .collect()
    }
}

/// Field samples at `theta_j = 2 pi j / N_s` on the measurement circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    geometry: ProblemGeometry,
    values: Vec<Complex64>,
    noise_level: f64,
}

impl BoundaryData {
    pub fn new(
        geometry: &ProblemGeometry,
        values: Vec<Complex64>,
        noise_level: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(IspError::InvalidArgument(
                "boundary data needs at least one sample".into(),
            ));
        }
        if !(noise_level.is_finite() && noise_level >= 0.0) {
            return Err(IspError::domain(
                "noise_level",
                noise_level,
                "must be nonnegative",
            ));
        }
        Ok(Self {
            geometry: *geometry,
            values,
            noise_level,
        })
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.values.len() as f64
    }

    /// Root mean square of the samples.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.len() as f64).sqrt()
    }

    /// `L^2` norm on the circle by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        self.rms() * (2.0 * PI * self.geometry.r()).sqrt()
    }
}

/// `H_0^(1)(k |x - y|)` for `x` on the measurement circle at angle `theta_x`
/// and `y = (rho, theta_y)`.
pub fn kernel(g: &ProblemGeometry, theta_x: f64, rho: f64, theta_y: f64) -> Result<Complex64> {
    let d = distance(g.r(), theta_x, rho, theta_y);
    if d == 0.0 {
        return Err(IspError::Geometry(
            "measurement point coincides with a source node".into(),
        ));
    }
    let (j0, y0) = specfun::hankel0(g.k() * d)?;
    Ok(Complex64::new(j0, y0))
}

fn distance(r: f64, theta_x: f64, rho: f64, theta_y: f64) -> f64 {
    (r * r + rho * rho - 2.0 * r * rho * (theta_x - theta_y).cos())
        .max(0.0)
        .sqrt()
}

/// The same kernel from the addition theorem truncated at `|nu| <= v_max`;
/// valid for `rho < R`.
pub fn graf_kernel(
    g: &ProblemGeometry,
    theta_x: f64,
    rho: f64,
    theta_y: f64,
    v_max: usize,
) -> Result<Complex64> {
    let jk = bessel_j_sequence(v_max, g.kappa())?;
    let yk = bessel_y_sequence(v_max, g.kappa())?;
    let jr = bessel_j_sequence(v_max, g.k() * rho.max(f64::MIN_POSITIVE))?;
    let dphi = theta_x - theta_y;
    let mut acc = Complex64::new(jk.value(0) * jr.value(0), yk.value(0) * jr.value(0));
    for n in 1..=v_max {
        // the +nu and -nu terms combine to 2 cos(nu dphi)
        let h = Complex64::new(jk.value(n), yk.value(n));
        acc += h * jr.value(n) * 2.0 * (n as f64 * dphi).cos();
    }
    Ok(acc)
}

/// Kernel matrix with rows scaled by the square root of the boundary weights
/// and columns by the square root of the area weights, so its singular values
/// approximate those of the operator.
#[derive(Debug, Clone)]
pub struct ForwardMatrix {
    grid: SourceGrid,
    n_s: usize,
    entries: DMatrix<Complex64>,
}

impl ForwardMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn grid(&self) -> &SourceGrid {
        &self.grid
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    fn boundary_weight(&self) -> f64 {
        2.0 * PI * self.grid.geometry().r() / self.n_s as f64
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .entries
            .clone()
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Discrete forward map: boundary samples of `F s`.
    pub fn apply(&self, s: &SourceField) -> Result<BoundaryData> {
        if s.grid() != &self.grid {
            return Err(IspError::InvalidArgument(
                "source lives on a different grid".into(),
            ));
        }
        let nt = self.grid.n_theta();
        let weighted: Vec<Complex64> = s
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| v * self.grid.area_weight(idx / nt).sqrt())
            .collect();
        let x = nalgebra::DVector::from_vec(weighted);
        let b = &self.entries * x;
        let scale = self.boundary_weight().sqrt().recip();
        BoundaryData::new(
            self.grid.geometry(),
            b.iter().map(|v| v * scale).collect(),
            0.0,
        )
    }

    /// Truncated-SVD solve keeping the `rank` largest singular values.
    pub fn tsvd_solve(&self, data: &BoundaryData, rank: usize) -> Result<SourceField> {
        if data.len() != self.n_s {
            return Err(IspError::InvalidArgument(format!(
                "{} samples for a matrix with {} rows",
                data.len(),
                self.n_s
            )));
        }
        let svd = self.entries.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested");
        let vt = svd.v_t.as_ref().expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let ws = self.boundary_weight().sqrt();
        let b: Vec<Complex64> = data.values().iter().map(|v| v * ws).collect();
        let mut x = vec![Complex64::new(0.0, 0.0); self.entries.ncols()];
        for &k in order.iter().take(rank) {
            let coeff: Complex64 = (0..self.n_s)
                .map(|r| u[(r, k)].conj() * b[r])
                .sum::<Complex64>()
                / svd.singular_values[k];
            for (c, xc) in x.iter_mut().enumerate() {
                *xc += coeff * vt[(k, c)].conj();
            }
        }
        let nt = self.grid.n_theta();
        for (idx, v) in x.iter_mut().enumerate() {
            *v /= self.grid.area_weight(idx / nt).sqrt();
        }
        SourceField::new(self.grid.clone(), x)
    }
}

/// Assembles the weighted kernel matrix on an `n_r x n_theta` source grid
/// and `n_s` boundary points.
///
/// The logarithmic part of the kernel is split off and its angular Fourier
/// series, truncated at the grid's Nyquist order, is added back, so the
/// trapezoid rule in angle stays spectrally accurate even when `R = R0`.
pub fn assemble_forward(
    g: &ProblemGeometry,
    n_r: usize,
    n_theta: usize,
    n_s: usize,
) -> Result<ForwardMatrix> {
    if n_r == 0 || n_theta < 2 || n_s == 0 {
        return Err(IspError::InvalidArgument("grid sizes are too small".into()));
    }
    let grid = SourceGrid::new(g, n_r, n_theta)?;
    let r = g.r();
    let half = n_theta / 2;
    let ws = (2.0 * PI * r / n_s as f64).sqrt();
    let mut entries = DMatrix::<Complex64>::zeros(n_s, grid.len());
    for i in 0..n_r {
        let rho = grid.radii()[i];
        let wa = grid.area_weight(i).sqrt();
        let q = rho / r;
        for j in 0..n_theta {
            let theta_y = grid.theta(j);
            let col = grid.index(i, j);
            for row in 0..n_s {
                let theta_x = 2.0 * PI * row as f64 / n_s as f64;
                let dphi = theta_x - theta_y;
                let d = distance(r, theta_x, rho, theta_y);
                if d == 0.0 {
                    return Err(IspError::Geometry(
                        "measurement point coincides with a source node".into(),
                    ));
                }
                let (j0, y0) = specfun::hankel0(g.k() * d)?;
                let log_series =
                    truncated_log_distance(r, q, dphi, half, n_theta.is_multiple_of(2));
                let im = y0 - TWO_OVER_PI * d.ln() + TWO_OVER_PI * log_series;
                entries[(row, col)] = Complex64::new(j0, im) * (ws * wa);
            }
        }
    }
    log::debug!("assembled forward matrix {n_s} x {}", grid.len());
    Ok(ForwardMatrix { grid, n_s, entries })
}

/// `ln R - sum_{n=1}^{N} c_n q^n cos(n phi) / n`, the Fourier series of
/// `ln |x - y|` for `q = rho / R < 1`, with `c_N = 1/2` when `N` is the
/// Nyquist order of an even grid.
fn truncated_log_distance(r: f64, q: f64, phi: f64, n_max: usize, halve_last: bool) -> f64 {
    let c1 = phi.cos();
    let (mut cos_prev, mut cos_cur) = (1.0, c1);
    let mut qn = q;
    let mut sum = 0.0;
    for n in 1..=n_max {
        let w = if halve_last && n == n_max { 0.5 } else { 1.0 };
        sum += w * qn * cos_cur / n as f64;
        qn *= q;
        let next = 2.0 * c1 * cos_cur - cos_prev;
        cos_prev = cos_cur;
        cos_cur = next;
    }
    r.ln() - sum
}

/// `U(theta_j) = sum_{|m| <= modes} sigma_m (s, psi_m) phi_m(theta_j)` on
/// `n_s` equispaced boundary points, inner products by the source grid.
pub fn apply_forward_analytic(s: &SourceField, modes: usize, n_s: usize) -> Result<BoundaryData> {
    if n_s == 0 {
        return Err(IspError::InvalidArgument(
            "need at least one boundary sample".into(),
        ));
    }
    let coeffs = analytic_coefficients(s, modes)?;
    let g = *s.grid().geometry();
    let mm = modes as i64;
    let values = (0..n_s)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_s as f64;
            (-mm..=mm)
                .zip(&coeffs)
                .map(|(m, c)| c * Complex64::from_polar(1.0, m as f64 * th))
                .sum()
        })
        .collect();
    BoundaryData::new(&g, values, 0.0)
}

/// Coefficient of `e^{i m theta}` in `F s` for `m = -modes ..= modes`:
/// `H_m(kR) sum_i rho_i w_i J_m(k rho_i) S_i(m)`, which equals
/// `sigma_m (s, psi_m) phi_m` with the angular factor stripped.
pub(crate) fn analytic_coefficients(s: &SourceField, modes: usize) -> Result<Vec<Complex64>> {
    let grid = s.grid();
    let g = *grid.geometry();
    let spectrum = build_spectrum(&g, modes.max(1))?;
    let phases = hankel_phases(&g, modes)?;
    let moments = s.angular_moments(modes);
    let jr: Vec<_> = grid
        .radii()
        .iter()
        .map(|&rho| bessel_j_sequence(modes, g.k() * rho))
        .collect::<Result<_>>()?;
    let mm = modes as i64;
    let mut out = Vec::with_capacity(2 * modes + 1);
    for (idx, m) in (-mm..=mm).enumerate() {
        let n = m.unsigned_abs() as usize;
        let row = &spectrum.rows()[n];
        if row.a_m == 0.0 && !row.log_sigma.is_finite() {
            log::warn!("skipping degenerate mode {m}");
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let half_ln_h2 = 0.5 * row.log_abs_h2;
        let parity = if m < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &rho) in grid.radii().iter().enumerate() {
            let j = &jr[i];
            let sign = j.signum(n);
            if sign == 0.0 {
                continue;
            }
            // |H_m| J_m(k rho) in logs, finite even when each factor is not
            let mag = (half_ln_h2 + j.ln_abs(n)).exp();
            acc += moments[i][idx] * (sign * parity * mag * rho * grid.radial_weights()[i]);
        }
        out.push(acc * Complex64::from_polar(1.0, phases[idx]));
    }
    Ok(out)
}

/// Clean analytic data plus complex Gaussian noise whose RMS is
/// `noise_level` times the RMS of the clean samples. The noise stream is a
/// function of `seed` only.
pub fn synthesize_measurement(
    s: &SourceField,
    modes: usize,
    n_s: usize,
    noise_level: f64,
    seed: u64,
) -> Result<BoundaryData> {
    if !(noise_level.is_finite() && noise_level >= 0.0) {
        return Err(IspError::domain(
            "noise_level",
            noise_level,
            "must be nonnegative",
        ));
    }
    let clean = apply_forward_analytic(s, modes, n_s)?;
    if noise_level == 0.0 {
        return Ok(clean);
    }
    let g = *clean.geometry();
    let std = noise_level * clean.rms() / 2.0f64.sqrt();
    let values = add_noise(clean.values(), std, seed);
    BoundaryData::new(&g, values, noise_level)
}

fn add_noise(values: &[Complex64], std: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * std
        })
        .collect()
}
