//! Base learners trained on transformed targets.
//!
//! Both learners minimize squared error, which is what makes the target
//! transform equivalent to the weighted objective it encodes. The set is
//! closed but small; adding a learner means extending `LearnerSpec` and
//! `FittedModel` together.

mod forest;
mod ridge;

pub use forest::{fit_forest, ForestModel, ForestParams, Tree, TreeNode};
pub use ridge::{fit_ridge, smoother_weights, RidgeModel, RidgeParams};

use crate::error::Result;
use crate::source::SourcePredictor;
use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

/// Which base learner to train, with its settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub enum LearnerSpec {
    Ridge(RidgeParams),
    Forest(ForestParams),
}

impl LearnerSpec {
    pub fn default_ridge() -> Self {
        LearnerSpec::Ridge(RidgeParams::default())
    }

    pub fn default_forest() -> Self {
        LearnerSpec::Forest(ForestParams::default())
    }
}

/// A trained base learner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedModel {
    Ridge(RidgeModel),
    Forest(ForestModel),
}

impl FittedModel {
    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Ridge(m) => m.n_features(),
            FittedModel::Forest(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        match self {
            FittedModel::Ridge(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
        }
    }

    pub fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        match self {
            FittedModel::Ridge(m) => m.predict_batch(xs),
            FittedModel::Forest(m) => m.predict_batch(xs),
        }
    }
}

/// Fitted models can serve as frozen sources for a later transfer fit.
/// Dimension mismatches are a caller bug here and panic; use `predict` for a
/// checked call.
impl SourcePredictor for FittedModel {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        FittedModel::predict(self, x).expect("source input dimension")
    }

    fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Array1<f64> {
        FittedModel::predict_batch(self, xs).expect("source input dimension")
    }
}

/// Train the specified learner on (x, z).
pub fn fit(spec: &LearnerSpec, x: ArrayView2<'_, f64>, z: ArrayView1<'_, f64>) -> Result<FittedModel> {
    match spec {
        LearnerSpec::Ridge(p) => fit_ridge(x, z, p).map(FittedModel::Ridge),
        LearnerSpec::Forest(p) => fit_forest(x, z, p).map(FittedModel::Forest),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dispatch_matches_direct_fits() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.5]];
        let z = array![1.0, 2.0, 3.0, 2.5];
        let via_spec = fit(&LearnerSpec::default_ridge(), x.view(), z.view()).unwrap();
        let direct = fit_ridge(x.view(), z.view(), &RidgeParams::default()).unwrap();
        let q = array![0.5, 0.5];
        assert_eq!(
            via_spec.predict(q.view()).unwrap(),
            direct.predict(q.view()).unwrap()
        );
    }

    #[test]
    fn fitted_model_source_agrees_with_predict() {
        let x = array![[1.0], [2.0], [3.0]];
        let z = array![2.0, 4.0, 6.0];
        let m = fit(&LearnerSpec::default_ridge(), x.view(), z.view()).unwrap();
        let q = array![1.5];
        let via_trait = SourcePredictor::predict(&m, q.view());
        assert_eq!(via_trait, m.predict(q.view()).unwrap());
    }
}
