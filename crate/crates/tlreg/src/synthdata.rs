//! Synthetic task generators and the MSE-landscape experiment.
//!
//! Tasks come in source/target pairs controlled by a mixing weight `alpha`:
//! the target parameters are `(1 - alpha) * source + alpha * perturbation`,
//! so `alpha = 0` makes the tasks identical and `alpha = 1` makes them
//! unrelated. Feature draws, noise draws, weight draws, and the evaluation
//! set all use disjoint derived streams, so changing one knob (say the noise
//! level) never changes the others' draws.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::learners::{fit, LearnerSpec};
use crate::rng::{derive_rng, SeedStream};
use crate::selection::GridSpec;
use crate::source::{LinearSource, ReluSource, SourcePredictor};
use crate::transfer::{blend_predict, transform_targets};
use ndarray::{Array1, Array2};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Hidden width of the ReLU task family.
pub const RELU_WIDTH: usize = 50;

/// Input dimension of the ReLU task family.
pub const RELU_INPUT_DIM: usize = 300;

/// Default training-set size for landscape experiments.
pub const DEFAULT_N_TRAIN: usize = 50;

/// Default evaluation-set size for landscape experiments.
pub const DEFAULT_N_EVAL: usize = 1000;

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn normal_vector(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| {
        let g: f64 = StandardNormal.sample(rng);
        std * g
    })
}

fn normal_matrix(rng: &mut ChaCha8Rng, shape: (usize, usize), std: f64) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| {
        let g: f64 = StandardNormal.sample(rng);
        std * g
    })
}

/// Mix `alpha * perturbation + (1 - alpha) * base`, preserving the base (or
/// the perturbation) bitwise at the endpoints.
fn mix<D: ndarray::Dimension>(
    base: &ndarray::Array<f64, D>,
    perturbation: &ndarray::Array<f64, D>,
    alpha: f64,
) -> ndarray::Array<f64, D> {
    if alpha == 0.0 {
        base.clone()
    } else if alpha == 1.0 {
        perturbation.clone()
    } else {
        base * (1.0 - alpha) + perturbation * alpha
    }
}

/// Linear source/target pair: f(x) = theta . x on both sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearTaskPair {
    theta_s: Array1<f64>,
    theta_t: Array1<f64>,
    alpha: f64,
}

impl LinearTaskPair {
    pub fn p(&self) -> usize {
        self.theta_s.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_s(&self) -> &Array1<f64> {
        &self.theta_s
    }

    pub fn theta_t(&self) -> &Array1<f64> {
        &self.theta_t
    }

    pub fn source(&self) -> LinearSource {
        LinearSource::new(self.theta_s.clone())
    }

    pub fn target(&self) -> LinearSource {
        LinearSource::new(self.theta_t.clone())
    }
}

/// Draw a linear pair: theta_s and a perturbation theta_w elementwise
/// standard normal, theta_t = (1 - alpha) theta_s + alpha theta_w.
pub fn gen_linear_tasks(p: usize, alpha: f64, seed: u64) -> Result<LinearTaskPair> {
    if p == 0 {
        return Err(Error::InvalidParams("p must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let theta_s = normal_vector(&mut derive_rng(seed, SeedStream::Weights, 0), p, 1.0);
    let theta_w = normal_vector(&mut derive_rng(seed, SeedStream::Weights, 1), p, 1.0);
    let theta_t = mix(&theta_s, &theta_w, alpha);
    Ok(LinearTaskPair {
        theta_s,
        theta_t,
        alpha,
    })
}

/// One-hidden-layer ReLU source/target pair with fixed dimensions
/// (width 50, input 300): f(x) = B . max(0, A x).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReluTaskPair {
    a_s: Array2<f64>,
    a_t: Array2<f64>,
    b_s: Array1<f64>,
    b_t: Array1<f64>,
    alpha: f64,
}

impl ReluTaskPair {
    pub fn input_dim(&self) -> usize {
        RELU_INPUT_DIM
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn source(&self) -> ReluSource {
        ReluSource::new(self.a_s.clone(), self.b_s.clone())
    }

    pub fn target(&self) -> ReluSource {
        ReluSource::new(self.a_t.clone(), self.b_t.clone())
    }
}

/// Draw a ReLU pair: every weight entry is normal with variance 0.5, target
/// weights are the alpha-mix of source and perturbation weights.
pub fn gen_relu_tasks(alpha: f64, seed: u64) -> Result<ReluTaskPair> {
    check_alpha(alpha)?;
    let std = 0.5_f64.sqrt();
    let shape = (RELU_WIDTH, RELU_INPUT_DIM);
    let a_s = normal_matrix(&mut derive_rng(seed, SeedStream::Weights, 0), shape, std);
    let b_s = normal_vector(&mut derive_rng(seed, SeedStream::Weights, 1), RELU_WIDTH, std);
    let a_w = normal_matrix(&mut derive_rng(seed, SeedStream::Weights, 2), shape, std);
    let b_w = normal_vector(&mut derive_rng(seed, SeedStream::Weights, 3), RELU_WIDTH, std);
    let a_t = mix(&a_s, &a_w, alpha);
    let b_t = mix(&b_s, &b_w, alpha);
    Ok(ReluTaskPair {
        a_s,
        a_t,
        b_s,
        b_t,
        alpha,
    })
}

/// Which synthetic family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Linear,
    Relu,
}

/// A generated pair of either family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TaskPair {
    Linear(LinearTaskPair),
    Relu(ReluTaskPair),
}

impl TaskPair {
    /// Draw a pair of the requested kind. The ReLU family has a fixed input
    /// dimension, so `p` must be 300 there.
    pub fn generate(kind: TaskKind, p: usize, alpha: f64, seed: u64) -> Result<Self> {
        match kind {
            TaskKind::Linear => Ok(TaskPair::Linear(gen_linear_tasks(p, alpha, seed)?)),
            TaskKind::Relu => {
                if p != RELU_INPUT_DIM {
                    return Err(Error::InvalidParams(format!(
                        "relu tasks have input dimension {RELU_INPUT_DIM}, got p = {p}"
                    )));
                }
                Ok(TaskPair::Relu(gen_relu_tasks(alpha, seed)?))
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            TaskPair::Linear(t) => t.p(),
            TaskPair::Relu(_) => RELU_INPUT_DIM,
        }
    }

    pub fn source(&self) -> Box<dyn SourcePredictor> {
        match self {
            TaskPair::Linear(t) => Box::new(t.source()),
            TaskPair::Relu(t) => Box::new(t.source()),
        }
    }

    pub fn target(&self) -> Box<dyn SourcePredictor> {
        match self {
            TaskPair::Linear(t) => Box::new(t.target()),
            TaskPair::Relu(t) => Box::new(t.target()),
        }
    }
}

fn sample_with_streams(
    f_t: &dyn SourcePredictor,
    p: usize,
    n: usize,
    sigma_eps: f64,
    seed: u64,
    feature_stream: SeedStream,
    noise_stream: SeedStream,
) -> Result<Dataset> {
    if p == 0 || n == 0 {
        return Err(Error::InvalidParams(
            "p and n must both be at least 1".into(),
        ));
    }
    if !sigma_eps.is_finite() || sigma_eps < 0.0 {
        return Err(Error::InvalidParams(format!(
            "sigma_eps must be finite and >= 0, got {sigma_eps}"
        )));
    }
    let x = normal_matrix(&mut derive_rng(seed, feature_stream, 0), (n, p), 1.0);
    let f = f_t.predict_batch(x.view());
    // sigma_eps = 0 must reproduce f exactly, so skip the noise draw.
    let y = if sigma_eps == 0.0 {
        f
    } else {
        let eps = normal_vector(&mut derive_rng(seed, noise_stream, 0), n, sigma_eps);
        f + eps
    };
    Dataset::new(x, y)
}

/// Draw a training set: x rows iid standard normal, y = f_t(x) + noise.
pub fn sample_dataset(
    f_t: &dyn SourcePredictor,
    p: usize,
    n: usize,
    sigma_eps: f64,
    seed: u64,
) -> Result<Dataset> {
    sample_with_streams(
        f_t,
        p,
        n,
        sigma_eps,
        seed,
        SeedStream::Features,
        SeedStream::Noise,
    )
}

/// Draw an evaluation set from streams disjoint from `sample_dataset`'s, so
/// the same seed yields fresh points.
pub fn sample_eval_dataset(
    f_t: &dyn SourcePredictor,
    p: usize,
    n: usize,
    sigma_eps: f64,
    seed: u64,
) -> Result<Dataset> {
    sample_with_streams(
        f_t,
        p,
        n,
        sigma_eps,
        seed,
        SeedStream::EvalFeatures,
        SeedStream::EvalNoise,
    )
}

/// Full specification of one landscape run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: TaskKind,
    pub p: usize,
    pub alpha: f64,
    pub sigma_eps: f64,
    pub n_train: usize,
    pub n_eval: usize,
    pub learner: LearnerSpec,
    pub grid: GridSpec,
    pub seed: u64,
}

/// One grid cell of a landscape: held-out MSE, raw and affinely rescaled
/// onto [0, 1] over the whole grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub tau: f64,
    pub rho: f64,
    pub mse_raw: f64,
    pub mse_rescaled: f64,
}

/// Generate a task pair, a training set, and a fresh evaluation set, then
/// fit the full pipeline at every grid point and record the held-out MSE.
/// The rescaled column maps the grid's raw values onto [0, 1] (all zeros if
/// the landscape is flat), preserving order.
pub fn landscape_experiment(config: &ExperimentConfig) -> Result<Vec<LandscapeRow>> {
    let pair = TaskPair::generate(config.kind, config.p, config.alpha, config.seed)?;
    let target = pair.target();
    let source = pair.source();
    let train = sample_dataset(
        target.as_ref(),
        config.p,
        config.n_train,
        config.sigma_eps,
        config.seed,
    )?;
    let eval = sample_eval_dataset(
        target.as_ref(),
        config.p,
        config.n_eval,
        config.sigma_eps,
        config.seed,
    )?;
    let source_train = source.predict_batch(train.features());
    let source_eval = source.predict_batch(eval.features());
    if source_train.iter().chain(source_eval.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("source predictions"));
    }

    // Cells sharing a tau value share the fitted model; only the blend
    // weight changes. Points are sorted by tau, so groups are contiguous.
    let points = config.grid.points();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (idx, &(tau, _)) in points.iter().enumerate() {
        match groups.last_mut() {
            Some((t, v)) if *t == tau => v.push(idx),
            _ => groups.push((tau, vec![idx])),
        }
    }
    let per_group: Result<Vec<Vec<(usize, f64)>>> = map_indexed(groups.len(), |gi| {
        let (tau, idxs) = &groups[gi];
        let z = transform_targets(&train, source_train.view(), *tau)?;
        let model = fit(&config.learner, train.features(), z.view())?;
        let preds = model.predict_batch(eval.features())?;
        let cells = idxs
            .iter()
            .map(|&pi| {
                let rho = points[pi].1;
                let mse = preds
                    .iter()
                    .zip(source_eval.iter())
                    .zip(eval.targets().iter())
                    .map(|((&p, &s), &y)| {
                        let e = blend_predict(p, s, rho) - y;
                        e * e
                    })
                    .sum::<f64>()
                    / eval.n() as f64;
                (pi, mse)
            })
            .collect();
        Ok(cells)
    })
    .into_iter()
    .collect();

    let mut raw: Vec<(f64, f64, f64)> = points.iter().map(|&(t, r)| (t, r, f64::NAN)).collect();
    for (pi, mse) in per_group?.into_iter().flatten() {
        raw[pi].2 = mse;
    }

    let min = raw.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max = raw.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    Ok(raw
        .into_iter()
        .map(|(tau, rho, mse_raw)| LandscapeRow {
            tau,
            rho,
            mse_raw,
            mse_rescaled: if span > 0.0 { (mse_raw - min) / span } else { 0.0 },
        })
        .collect())
}

/// The landscape cell with the smallest raw MSE, ties broken like
/// hyperparameter selection (larger rho, then closer to the diagonal, then
/// smaller |tau|, then smaller tau).
pub fn argmin_row(rows: &[LandscapeRow]) -> Option<&LandscapeRow> {
    rows.iter().min_by(|a, b| {
        a.mse_raw
            .total_cmp(&b.mse_raw)
            .then(b.rho.total_cmp(&a.rho))
            .then((a.tau - a.rho).abs().total_cmp(&(b.tau - b.rho).abs()))
            .then(a.tau.abs().total_cmp(&b.tau.abs()))
            .then(a.tau.total_cmp(&b.tau))
    })
}
