//! Analytic singular system of the source-to-near-field operator for the
//! two-dimensional Helmholtz inverse source problem.
//!
//! The crate computes the singular values `sigma_m` of the operator mapping a
//! source supported in the disk of radius `R0` to its radiated field on the
//! circle of radius `R`, the bandwidth (the angular frequency beyond which the
//! spectrum is strictly decreasing), the Bessel-zero bounds on that bandwidth,
//! and truncated-SVD reconstructions built on top of the singular system.
//!
//! ```
//! use isp_core::{bandwidth, ProblemGeometry};
//!
//! let g = ProblemGeometry::from_size_parameters(10.0 * std::f64::consts::PI, 10.0 * std::f64::consts::PI).unwrap();
//! let report = bandwidth::report(&g).unwrap();
//! assert_eq!(report.bandwidth, 27);
//! assert_eq!(report.lower, 26);
//! ```

// Reference values in unit tests are quoted to full published precision.
#![cfg_attr(
    test,
    allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)
)]

pub mod bandwidth;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod geometry;
pub mod quadrature;
pub mod singular;
pub mod specfun;
pub mod tsvd;

pub use bandwidth::BandwidthReport;
pub use error::{IspError, Result};
pub use experiments::{RegressionFit, SweepRecord};
pub use forward::{BoundaryData, ForwardMatrix, SourceField, SourceGrid};
pub use geometry::ProblemGeometry;
pub use singular::{SpectrumRow, SpectrumTable};
pub use tsvd::{ModalCoefficients, Reconstruction, TruncationPolicy};
