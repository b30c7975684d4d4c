use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use isp_bench::{far_field, moderate};
use isp_core::bandwidth::{self, bound_lower, bound_upper};
use isp_core::experiments::{run_sweep, SweepConfig};
use isp_core::forward::assemble_forward;
use isp_core::singular::{build_spectrum, default_horizon};

fn spectrum(c: &mut Criterion) {
    let g = far_field();
    let h = default_horizon(g.kappa0());
    c.bench_function("build_spectrum 10pi/100pi", |b| {
        b.iter(|| build_spectrum(black_box(&g), h).unwrap())
    });
    c.bench_function("bandwidth report 10pi/100pi", |b| {
        b.iter(|| bandwidth::report(black_box(&g)).unwrap())
    });
}

fn bounds(c: &mut Criterion) {
    c.bench_function("bounds kappa0=100pi", |b| {
        b.iter(|| {
            let k = black_box(100.0 * PI);
            (bound_lower(k).unwrap(), bound_upper(k).unwrap())
        })
    });
}

fn sweep(c: &mut Criterion) {
    let config = SweepConfig {
        n_points: 20,
        ..SweepConfig::default()
    };
    c.bench_function("sweep 20 points", |b| {
        b.iter(|| run_sweep(black_box(&config)).unwrap())
    });
}

fn forward(c: &mut Criterion) {
    let g = moderate();
    let mut group = c.benchmark_group("forward");
    group.sample_size(10);
    group.bench_function("assemble 16x32 -> 64", |b| {
        b.iter(|| assemble_forward(black_box(&g), 16, 32, 64).unwrap())
    });
    group.finish();
}

criterion_group!(benches, spectrum, bounds, sweep, forward);
criterion_main!(benches);
