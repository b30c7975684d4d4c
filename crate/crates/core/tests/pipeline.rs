use std::f64::consts::PI;

use approx::assert_relative_eq;
use isp_core::csv;
use isp_core::forward::synthesize_measurement;
use isp_core::tsvd::{modal_decompose, pick_truncation, tsvd_reconstruct};
use isp_core::{ProblemGeometry, SourceField, SourceGrid, TruncationPolicy};
use num_complex::Complex64;

#[test]
fn synthesize_store_reload_and_invert() {
    let g = ProblemGeometry::from_size_parameters(10.0 * PI, 10.0 * PI).unwrap();
    let grid = SourceGrid::new(&g, 40, 96).unwrap();
    let truth = SourceField::from_modes(
        grid.clone(),
        &[
            (2, Complex64::new(1.0, 0.0)),
            (-9, Complex64::new(0.0, 0.5)),
        ],
    )
    .unwrap();
    let data = synthesize_measurement(&truth, 40, 128, 0.0, 1).unwrap();
    let data = csv::read_boundary(&csv::write_boundary(&data)).unwrap();

    let n = pick_truncation(&g, TruncationPolicy::Lower).unwrap();
    assert_eq!(n, 26);
    let coeffs = modal_decompose(&data, n).unwrap();
    let rec = tsvd_reconstruct(&coeffs, n, &grid).unwrap();
    assert!(rec.source.distance(&truth) / truth.norm() < 1e-6);

    let text = csv::write_reconstruction(&rec.source, rec.truncation, rec.residual, "B-");
    let (back, n_back, residual, policy) = csv::read_reconstruction(&text).unwrap();
    assert_eq!((n_back, policy.as_str()), (n, "B-"));
    assert_relative_eq!(residual, rec.residual);
    assert_eq!(back, rec.source);
}

#[test]
fn noisy_data_is_reproducible() {
    let g = ProblemGeometry::from_size_parameters(8.0, 12.0).unwrap();
    let grid = SourceGrid::new(&g, 16, 32).unwrap();
    let s = SourceField::from_fn(grid, |r, t| Complex64::new(r * t.cos(), 1.0));
    let a = synthesize_measurement(&s, 20, 64, 0.02, 99).unwrap();
    let b = synthesize_measurement(&s, 20, 64, 0.02, 99).unwrap();
    assert_eq!(csv::write_boundary(&a), csv::write_boundary(&b));
}
