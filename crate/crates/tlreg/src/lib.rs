//! Transfer-learning regression with a two-knob hyperparameter family.
//!
//! Given a frozen source model and a target training set, the pipeline is:
//!
//! 1. transform the targets with weight `tau` so that ordinary least-squares
//!    fitting optimizes a source-aware objective ([`transfer::transform_targets`]),
//! 2. train a base learner on the transformed targets ([`learners`]),
//! 3. blend the trained model with the source using weight `rho`
//!    ([`transfer::blend_predict`]).
//!
//! Familiar strategies are single points of the `(tau, rho)` square: plain
//! fitting at (0, 0), direct reuse of the source at `rho = 1`,
//! covariate-shift correction on the diagonal `tau = rho`, and
//! similarity regularization at `tau < 0, rho = 0`. [`selection`] picks the
//! pair by paired cross-validation, [`analysis`] provides the closed-form
//! bias/variance view for linear smoothers, and [`synthdata`] generates the
//! synthetic task families used to exercise all of it.
//!
//! Determinism is a contract throughout: every random draw comes from a
//! counter-derived stream ([`rng::derive_rng`]), so results are reproducible
//! bit for bit, with or without the `parallel` feature.

pub mod analysis;
pub mod dataset;
pub mod error;
mod exec;
pub mod learners;
mod linalg;
pub mod rng;
pub mod selection;
pub mod source;
pub mod synthdata;
pub mod transfer;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use learners::{FittedModel, ForestParams, LearnerSpec, RidgeParams};
pub use selection::{
    classify_regime, cross_validate, select_hyperparams, CvResultTable, GridSpec, Regime,
    RegimeLabel,
};
pub use source::{HashNoiseSource, LinearSource, ReluSource, SourcePredictor};
pub use transfer::{blend_predict, fit_transfer, TransferHyperparams, TransferPredictor};
