//! Fixed geometries shared by the benchmarks.

use std::f64::consts::PI;

use isp_core::ProblemGeometry;

/// `kappa0 = kappa = 10 pi`.
pub fn moderate() -> ProblemGeometry {
    ProblemGeometry::from_size_parameters(10.0 * PI, 10.0 * PI).expect("valid geometry")
}

/// `kappa0 = 10 pi`, `kappa = 100 pi`.
pub fn far_field() -> ProblemGeometry {
    ProblemGeometry::from_size_parameters(10.0 * PI, 100.0 * PI).expect("valid geometry")
}
