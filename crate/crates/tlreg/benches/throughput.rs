//! Throughput comparison for the data-parallel cores.
//!
//! Run twice to compare schedulers on the same workloads:
//!
//! ```text
//! cargo bench -p tlreg                          # rayon (default)
//! cargo bench -p tlreg --no-default-features    # sequential fallback
//! ```
//!
//! Both configurations must produce identical numerical results; these
//! benchmarks only measure wall-clock differences.

use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;
use tlreg::learners::{fit_forest, ForestParams};
use tlreg::selection::{cross_validate, GridSpec};
use tlreg::synthdata::{
    gen_linear_tasks, landscape_experiment, sample_dataset, ExperimentConfig, TaskKind,
};
use tlreg::{LearnerSpec, RidgeParams};

fn cv_grid(c: &mut Criterion) {
    let pair = gen_linear_tasks(30, 0.5, 7).unwrap();
    let data = sample_dataset(&pair.target(), 30, 60, 1.0, 7).unwrap();
    let source = pair.source();
    let grid = GridSpec::new(
        (-4..=3).map(|i| i as f64 / 4.0).collect(),
        (0..=4).map(|i| i as f64 / 4.0).collect(),
        true,
    )
    .unwrap();
    let spec = LearnerSpec::Ridge(RidgeParams::with_lambda(1e-4));
    c.bench_function("cv_grid_ridge_40cells", |b| {
        b.iter(|| cross_validate(&data, &source, &grid, &spec, 5, 3).unwrap())
    });
}

fn landscape_ridge(c: &mut Criterion) {
    let config = ExperimentConfig {
        kind: TaskKind::Linear,
        p: 100,
        alpha: 0.5,
        sigma_eps: 1.0,
        n_train: 50,
        n_eval: 200,
        learner: LearnerSpec::Ridge(RidgeParams::with_lambda(1e-4)),
        grid: GridSpec::new(
            (-6..=3).map(|i| i as f64 / 4.0).collect(),
            (0..=4).map(|i| i as f64 / 4.0).collect(),
            true,
        )
        .unwrap(),
        seed: 11,
    };
    c.bench_function("landscape_ridge_50cells", |b| {
        b.iter(|| landscape_experiment(&config).unwrap())
    });
}

fn forest_fit(c: &mut Criterion) {
    let pair = gen_linear_tasks(20, 0.3, 5).unwrap();
    let data = sample_dataset(&pair.target(), 20, 150, 1.0, 5).unwrap();
    let x: Array2<f64> = data.features().to_owned();
    let z = data.targets().to_owned();
    let params = ForestParams {
        n_tree: 60,
        ..ForestParams::default()
    };
    c.bench_function("forest_fit_60trees", |b| {
        b.iter(|| fit_forest(x.view(), z.view(), &params).unwrap())
    });
}

criterion_group!(benches, cv_grid, landscape_ridge, forest_fit);
criterion_main!(benches);
