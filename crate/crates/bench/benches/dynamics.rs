use std::hint::black_box;

use cdam_core::dynamics::EnergyModel;
use cdam_core::graph::build_cycle;
use cdam_core::{init_state, normalize, random_patterns, Dynamics, ModelParams, StopRule};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for &(n, p) in &[(1000, 30), (2000, 50), (784, 500)] {
        let patterns = random_patterns(n, p, 0).unwrap();
        let coupling = normalize(&build_cycle(p, false).unwrap());
        let dynamics = Dynamics::new(&patterns, &coupling, ModelParams::new(0.5, 0.5)).unwrap();
        let s = init_state(&patterns, 0, 1.0, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_p{p}")), &s, |b, s| {
            b.iter(|| dynamics.step(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn converge_batch(c: &mut Criterion) {
    let (n, p) = (1000, 30);
    let patterns = random_patterns(n, p, 0).unwrap();
    let coupling = normalize(&build_cycle(p, false).unwrap());
    let dynamics = Dynamics::new(&patterns, &coupling, ModelParams::new(-0.5, 1.5)).unwrap();
    let mut initial = Array2::zeros((n, p));
    for mu in 0..p {
        let s = init_state(&patterns, mu, 1.0, mu as u64).unwrap();
        initial.column_mut(mu).assign(&s.sigma);
    }
    c.bench_function("converge_batch/n1000_p30_101steps", |b| {
        b.iter(|| dynamics.converge_batch(black_box(&initial), StopRule::fixed(101)).unwrap())
    });
}

fn energy_eval(c: &mut Criterion) {
    let (n, p) = (1000, 30);
    let patterns = random_patterns(n, p, 0).unwrap();
    let graph = build_cycle(p, false).unwrap();
    let model = EnergyModel::new(&graph, p).unwrap();
    let s = init_state(&patterns, 0, 1.0, 0).unwrap();
    let params = ModelParams::new(0.5, 0.5);
    c.bench_function("energy/n1000_p30", |b| {
        b.iter(|| model.evaluate(black_box(&s), &patterns, &params).unwrap())
    });
}

criterion_group!(benches, step, converge_batch, energy_eval);
criterion_main!(benches);
