use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kuramoto_signed::sampling::{seeded, uniform_in_arc};
use kuramoto_signed::{
    admissible_p, build_band_network, critical_diameter, integrate, symmetric_eigenvalues,
    BandNetworkSpec, IntegratorConfig, ModelParams, SystemState,
};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("symmetric_eigenvalues");
    for n in [16, 64, 128] {
        let k = build_band_network(&BandNetworkSpec::new(n, n / 8, 0.7).unwrap()).laplacian();
        group.bench_with_input(BenchmarkId::from_parameter(n), &k, |b, k| {
            b.iter(|| symmetric_eigenvalues(black_box(k)).unwrap())
        });
    }
    group.finish();
}

fn rk4(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_1000_steps");
    for n in [10, 40] {
        let theta = uniform_in_arc(&mut seeded(1), n, 0.0, 1.0);
        let kappa = build_band_network(&BandNetworkSpec::new(n, 2, 0.3).unwrap());
        let state = SystemState::new(theta, kappa).unwrap();
        let params = ModelParams::new(0.0, 0.1, -1.0, 0.5).unwrap();
        let cfg = IntegratorConfig::new(1e-2, 10.0, 100).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter(|| integrate(black_box(s), &params, &cfg).unwrap())
        });
    }
    group.finish();
}

fn dbar(c: &mut Criterion) {
    c.bench_function("critical_diameter_10k", |b| {
        b.iter(|| critical_diameter(black_box(-0.5 * PI), 0.5, -0.3, 10_000).unwrap())
    });
}

fn admissible(c: &mut Criterion) {
    c.bench_function("admissible_p_n100_all_w", |b| {
        b.iter(|| {
            for w in 1..=49 {
                black_box(admissible_p(100, w, black_box(2)).unwrap());
            }
        })
    });
}

criterion_group!(benches, eigensolver, rk4, dbar, admissible);
criterion_main!(benches);
