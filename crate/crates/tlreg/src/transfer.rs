//! The transfer family itself: transform targets, fit, blend.
//!
//! A single pair (tau, rho) spans the whole family. Training a squared-error
//! learner on the transformed targets
//!
//! ```text
//! z_i = (y_i - tau * f_s(x_i)) / (1 - tau)
//! ```
//!
//! minimizes sum_i [ (y_i - f(x_i))^2 - tau * (f_s(x_i) - f(x_i))^2 ], i.e. a
//! fit to the data with an attraction toward (tau > 0) or repulsion from
//! (tau < 0) the frozen source model. Predictions then blend the fitted model
//! with the source:
//!
//! ```text
//! yhat(x) = (1 - rho) * f(x) + rho * f_s(x)
//! ```
//!
//! tau = rho = 0 is an ordinary fit, rho = 1 returns the source unchanged,
//! tau < 0 with rho = 0 is source-repelled regularization, and tau = rho
//! matches a covariate-shift correction with source-density weights.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit, FittedModel, LearnerSpec};
use crate::source::SourcePredictor;
use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

/// Validated (tau, rho) pair: tau finite and < 1, rho in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferHyperparams {
    tau: f64,
    rho: f64,
}

impl TransferHyperparams {
    pub fn new(tau: f64, rho: f64) -> Result<Self> {
        if !tau.is_finite() || tau >= 1.0 {
            return Err(Error::TauOutOfRange(tau));
        }
        if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
            return Err(Error::RhoOutOfRange(rho));
        }
        Ok(Self { tau, rho })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Transformed targets z_i = (y_i - tau * s_i) / (1 - tau).
///
/// tau = 0 returns the targets unchanged (bitwise); targets equal to the
/// source predictions are a fixed point for every admissible tau.
pub fn transform_targets(
    dataset: &Dataset,
    source_predictions: ArrayView1<'_, f64>,
    tau: f64,
) -> Result<Array1<f64>> {
    if !tau.is_finite() || tau >= 1.0 {
        return Err(Error::TauOutOfRange(tau));
    }
    if source_predictions.len() != dataset.n() {
        return Err(Error::DimensionMismatch {
            what: "source predictions",
            expected: dataset.n(),
            actual: source_predictions.len(),
        });
    }
    if tau == 0.0 {
        return Ok(dataset.targets().to_owned());
    }
    let y = dataset.targets();
    Ok(Array1::from_shape_fn(dataset.n(), |i| {
        (y[i] - tau * source_predictions[i]) / (1.0 - tau)
    }))
}

/// One summand of the weighted training objective at a candidate prediction:
/// (y - f)^2 - tau * (s - f)^2.
pub fn pointwise_objective(y: f64, source_pred: f64, candidate_pred: f64, tau: f64) -> f64 {
    let fit_term = y - candidate_pred;
    let source_term = source_pred - candidate_pred;
    fit_term * fit_term - tau * source_term * source_term
}

/// The weighted training objective sum_i [(y_i - f_i)^2 - tau (s_i - f_i)^2]
/// at candidate predictions f. Minimizing this over f is equivalent to plain
/// least squares against the transformed targets.
pub fn training_objective(
    targets: ArrayView1<'_, f64>,
    source_predictions: ArrayView1<'_, f64>,
    candidate_predictions: ArrayView1<'_, f64>,
    tau: f64,
) -> Result<f64> {
    if !tau.is_finite() || tau >= 1.0 {
        return Err(Error::TauOutOfRange(tau));
    }
    let n = targets.len();
    if source_predictions.len() != n {
        return Err(Error::DimensionMismatch {
            what: "source predictions",
            expected: n,
            actual: source_predictions.len(),
        });
    }
    if candidate_predictions.len() != n {
        return Err(Error::DimensionMismatch {
            what: "candidate predictions",
            expected: n,
            actual: candidate_predictions.len(),
        });
    }
    Ok((0..n)
        .map(|i| pointwise_objective(targets[i], source_predictions[i], candidate_predictions[i], tau))
        .sum())
}

/// A fitted transfer predictor: the trained base model plus the frozen source
/// it blends with.
pub struct TransferPredictor<'s> {
    hp: TransferHyperparams,
    model: FittedModel,
    source: &'s dyn SourcePredictor,
}

impl<'s> TransferPredictor<'s> {
    pub fn hyperparams(&self) -> TransferHyperparams {
        self.hp
    }

    pub fn model(&self) -> &FittedModel {
        &self.model
    }

    pub fn into_model(self) -> FittedModel {
        self.model
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.model.n_features() {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.model.n_features(),
                actual: x.len(),
            });
        }
        Ok(blend_predict(
            self.model.predict(x)?,
            self.source.predict(x),
            self.hp.rho(),
        ))
    }

    pub fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if xs.ncols() != self.model.n_features() {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.model.n_features(),
                actual: xs.ncols(),
            });
        }
        let model_preds = self.model.predict_batch(xs)?;
        let source_preds = self.source.predict_batch(xs);
        let rho = self.hp.rho();
        Ok(Array1::from_shape_fn(model_preds.len(), |i| {
            blend_predict(model_preds[i], source_preds[i], rho)
        }))
    }
}

/// Convex blend (1 - rho) * model + rho * source. rho = 0 and rho = 1 return
/// the respective input exactly.
pub fn blend_predict(model_pred: f64, source_pred: f64, rho: f64) -> f64 {
    if rho == 0.0 {
        model_pred
    } else if rho == 1.0 {
        source_pred
    } else {
        (1.0 - rho) * model_pred + rho * source_pred
    }
}

/// Fit the transfer family at fixed hyperparameters: evaluate the source on
/// the training rows, transform the targets, train the base learner. The fit
/// happens even at rho = 1 (the model is kept for diagnostics); the blend just
/// ignores it there.
pub fn fit_transfer<'s>(
    dataset: &Dataset,
    source: &'s dyn SourcePredictor,
    hp: TransferHyperparams,
    learner: &LearnerSpec,
) -> Result<TransferPredictor<'s>> {
    let source_preds = source.predict_batch(dataset.features());
    if source_preds.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("source predictions"));
    }
    let z = transform_targets(dataset, source_preds.view(), hp.tau())?;
    let model = fit(learner, dataset.features(), z.view())?;
    Ok(TransferPredictor {
        hp,
        model,
        source,
    })
}
