use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pvnls_bench::{orbit, orbit_field, params, OMEGA};
use pvnls_core::integrable::{eval_h_jet, OrbitForm, Sign};
use pvnls_core::melnikov::m123_single;
use pvnls_core::pde::{Scheme, SimulationConfig, Simulator};
use pvnls_core::reduced::{default_seed_grid, find_fixed_points};
use pvnls_core::QuadratureConfig;

fn eval_h(c: &mut Criterion) {
    let o = orbit();
    c.bench_function("eval_h_jet", |b| {
        b.iter(|| eval_h_jet(black_box(0.3), black_box(1.1), &o, OrbitForm::Even(Sign::Plus)))
    });
}

fn melnikov(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    let mut g = c.benchmark_group("m123");
    g.sample_size(10);
    g.bench_function("default_quadrature", |b| {
        b.iter(|| m123_single(black_box(OMEGA), &cfg, Sign::Plus))
    });
    g.finish();
}

fn pde_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("pde_step");
    for scheme in [Scheme::Splitting, Scheme::Etd] {
        for n in [64, 128, 256] {
            let cfg = SimulationConfig {
                n,
                dt: 1e-4,
                scheme,
                ..Default::default()
            };
            let mut sim = Simulator::new(params(), cfg).unwrap();
            let mut field = orbit_field(n);
            g.bench_with_input(BenchmarkId::new(format!("{scheme:?}"), n), &n, |b, _| {
                b.iter(|| sim.step(&mut field).unwrap())
            });
        }
    }
    g.finish();
}

fn fixed_points(c: &mut Criterion) {
    let p = params();
    let seeds = default_seed_grid(&p);
    let mut g = c.benchmark_group("fixed_points");
    g.sample_size(10);
    g.bench_function("default_seeds", |b| b.iter(|| find_fixed_points(black_box(&p), &seeds)));
    g.finish();
}

criterion_group!(benches, eval_h, melnikov, pde_step, fixed_points);
criterion_main!(benches);
