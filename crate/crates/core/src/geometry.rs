use serde::{Deserialize, Serialize};

use crate::error::{IspError, Result};

/// Wavenumber and the two radii of the problem.
///
/// The source lives in the open disk of radius `r0`, the field is measured on
/// the circle of radius `r >= r0`; both share the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemGeometry {
    k: f64,
    r0: f64,
    r: f64,
}

impl ProblemGeometry {
    pub fn new(k: f64, r0: f64, r: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(IspError::Geometry(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(IspError::Geometry(format!(
                "source radius must be positive, got {r0}"
            )));
        }
        if !(r.is_finite() && r >= r0) {
            return Err(IspError::Geometry(format!(
                "measurement radius {r} must be at least the source radius {r0}"
            )));
        }
        Ok(Self { k, r0, r })
    }

    /// Geometry from the dimensionless size parameters with the measurement
    /// circle normalised to `R = 1`, so `k = kappa` and `R0 = kappa0 / kappa`.
    pub fn from_size_parameters(kappa0: f64, kappa: f64) -> Result<Self> {
        if !(kappa0.is_finite() && kappa0 > 0.0) {
            return Err(IspError::Geometry(format!(
                "kappa0 must be positive, got {kappa0}"
            )));
        }
        if !(kappa.is_finite() && kappa >= kappa0) {
            return Err(IspError::Geometry(format!(
                "kappa = {kappa} must be at least kappa0 = {kappa0}"
            )));
        }
        if kappa == kappa0 {
            return Self::new(kappa, 1.0, 1.0);
        }
        Self::new(kappa, kappa0 / kappa, 1.0)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Source size parameter `k R0`.
    pub fn kappa0(&self) -> f64 {
        self.k * self.r0
    }

    /// Measurement size parameter `k R`.
    pub fn kappa(&self) -> f64 {
        self.k * self.r
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_radii() {
        assert!(ProblemGeometry::new(1.0, 2.0, 1.0).is_err());
        assert!(ProblemGeometry::new(0.0, 1.0, 1.0).is_err());
        assert!(ProblemGeometry::new(1.0, 1.0, f64::NAN).is_err());
        assert!(ProblemGeometry::from_size_parameters(3.0, 2.0).is_err());
    }

    #[test]
    fn size_parameters_round_trip() {
        let g = ProblemGeometry::from_size_parameters(10.0, 100.0).unwrap();
        assert_eq!(g.r(), 1.0);
        assert!((g.kappa0() - 10.0).abs() < 1e-14);
        assert_eq!(g.kappa(), 100.0);

        let g = ProblemGeometry::from_size_parameters(7.5, 7.5).unwrap();
        assert_eq!(g.kappa0(), g.kappa());
    }
}
