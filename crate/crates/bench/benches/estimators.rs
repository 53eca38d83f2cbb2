use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use handrecon::estimators::{estimate_conditional_gaussian, estimate_map_noiseless, estimate_map_nullspace};
use handrecon::hand_model::METACARPAL_DOFS;
use handrecon::simulator::{run_reconstruction_experiment, synthetic_split};
use handrecon::stats::lilliefors_normality;
use handrecon::{
    build_prior, default_hand_model, DVector, MeasurementModel, Method, MveGain, SimulationConfig,
};

fn estimators(c: &mut Criterion) {
    let model = default_hand_model();
    let (train, _) = synthetic_split(&model, 1, 114, 1).unwrap();
    let prior = build_prior(&train, 1e-9).unwrap();
    let noiseless = MeasurementModel::selection(&model, &METACARPAL_DOFS, 0.0).unwrap();
    let noisy = MeasurementModel::selection(&model, &METACARPAL_DOFS, 7.0).unwrap();
    let y = DVector::from_column_slice(&[20.0, 35.0, 40.0, 10.0, 30.0]);

    let gain = MveGain::new(&prior, &noisy).unwrap();
    c.bench_function("mve_apply", |b| b.iter(|| gain.apply(black_box(&y)).unwrap()));
    c.bench_function("mve_gain_build", |b| b.iter(|| MveGain::new(black_box(&prior), &noisy).unwrap()));
    c.bench_function("map_lagrangian", |b| {
        b.iter(|| estimate_map_noiseless(&prior, noiseless.h(), black_box(&y)).unwrap())
    });
    c.bench_function("map_nullspace", |b| {
        b.iter(|| estimate_map_nullspace(&prior, noiseless.h(), black_box(&y)).unwrap())
    });
    c.bench_function("conditional_gaussian", |b| {
        b.iter(|| estimate_conditional_gaussian(&prior, &noiseless, black_box(&y)).unwrap())
    });
}

fn statistics(c: &mut Criterion) {
    let sample: Vec<f64> = (0..54).map(|i| ((i * 37 % 54) as f64 * 0.13).sin() * 5.0 + 10.0).collect();
    c.bench_function("lilliefors_n54", |b| b.iter(|| lilliefors_normality(black_box(&sample)).unwrap()));
}

fn experiment(c: &mut Criterion) {
    let model = default_hand_model();
    let (train, test) = synthetic_split(&model, 1, 114, 54).unwrap();
    let cfg = SimulationConfig::paper_defaults(&model, 1).unwrap();
    c.bench_function("experiment_114_54", |b| {
        b.iter(|| run_reconstruction_experiment(&train, &test, &cfg, &[Method::MveSmw, Method::Pinv]).unwrap())
    });
}

criterion_group!(benches, estimators, statistics, experiment);
criterion_main!(benches);
