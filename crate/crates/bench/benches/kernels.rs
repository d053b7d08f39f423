use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use expfunc::{
    frobenius_solve, g_mu, is_bernstein, simulate_functional, BernsteinOptions, BmDriftParams, LaplaceExponent,
    LevyTriplet, PositiveLawSpec, SimConfig,
};

fn bernstein(c: &mut Criterion) {
    let psi = LaplaceExponent::stable(0.5, 1.0, 0.2).unwrap();
    let opts = BernsteinOptions::default();
    c.bench_function("is_bernstein/stable", |b| {
        b.iter(|| is_bernstein(&|u| psi.eval(u).map(|x| -x), black_box(&opts)).unwrap())
    });
}

fn g(c: &mut Criterion) {
    let mu = PositiveLawSpec::inverse_gamma(1.5, 1.0).unwrap();
    let xi = LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap();
    c.bench_function("g_mu/inverse_gamma", |b| b.iter(|| g_mu(&mu, &xi, black_box(0.7)).unwrap()));
}

fn frobenius(c: &mut Criterion) {
    let p = BmDriftParams::from_theta(1.5).unwrap();
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
    c.bench_function("frobenius_solve/N200", |b| {
        b.iter(|| frobenius_solve(black_box(&[1.0, 0.5]), &p, 200, &grid, None).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let xi = LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap();
    let eta = LevyTriplet::deterministic(1.0);
    let cfg = SimConfig::new(10.0, 1e-2, 1000, 1).unwrap();
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("bm_drift/1000_paths", |b| b.iter(|| simulate_functional(&xi, &eta, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, bernstein, g, frobenius, simulation);
criterion_main!(benches);
