//! Ridge regression with an explicit linear-smoother view.
//!
//! The fit minimizes ||z - X b||^2 + lambda ||b||^2 (no intercept unless the
//! centering flag is set). Because predictions are linear in the training
//! responses, the model can report its smoother weights h(x) with
//! prediction(x) = h(x) . z, which the error-decomposition analysis consumes.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CholeskyFactor};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RidgeParams {
    /// L2 penalty, must be finite and >= 0.
    pub lambda: f64,
    /// Opt-in: center feature columns and responses (adds an implicit intercept).
    pub center: bool,
}

impl Default for RidgeParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            center: false,
        }
    }
}

impl RidgeParams {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Centering {
    pub(crate) x_mean: Array1<f64>,
    pub(crate) z_mean: f64,
}

/// Which Gram matrix was factored. For n < p the dual (kernel) form solves an
/// n x n system instead; coefficients are identical for lambda > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GramForm {
    /// (X^T X + lambda I_p), p x p.
    Primal,
    /// (X X^T + lambda I_n), n x n.
    Dual,
}

/// Retained training-side state needed to produce smoother weights. Not part
/// of the serialized model; a deserialized model predicts but cannot report
/// weights.
#[derive(Debug, Clone)]
pub(crate) struct SmootherContext {
    /// Training features, centered iff the model is centered.
    pub(crate) x: Array2<f64>,
    pub(crate) factor: CholeskyFactor,
    pub(crate) form: GramForm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeModel {
    params: RidgeParams,
    coefficients: Array1<f64>,
    centering: Option<Centering>,
    #[serde(skip)]
    pub(crate) context: Option<SmootherContext>,
}

impl RidgeModel {
    pub fn params(&self) -> RidgeParams {
        self.params
    }

    pub fn coefficients(&self) -> ArrayView1<'_, f64> {
        self.coefficients.view()
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    /// Assemble a predict-only model from its serializable parts.
    pub fn from_parts(
        params: RidgeParams,
        coefficients: Array1<f64>,
        center_stats: Option<(Array1<f64>, f64)>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        let centering = match center_stats {
            Some((x_mean, z_mean)) => {
                if x_mean.len() != coefficients.len() {
                    return Err(Error::DimensionMismatch {
                        what: "centering means",
                        expected: coefficients.len(),
                        actual: x_mean.len(),
                    });
                }
                Some(Centering { x_mean, z_mean })
            }
            None => None,
        };
        Ok(Self {
            params,
            coefficients,
            centering,
            context: None,
        })
    }

    pub(crate) fn center_stats(&self) -> Option<(ArrayView1<'_, f64>, f64)> {
        self.centering.as_ref().map(|c| (c.x_mean.view(), c.z_mean))
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.n_features(),
                actual: x.len(),
            });
        }
        Ok(match &self.centering {
            Some(c) => {
                let mut acc = c.z_mean;
                for ((&xi, &mi), &bi) in x.iter().zip(c.x_mean.iter()).zip(self.coefficients.iter())
                {
                    acc += (xi - mi) * bi;
                }
                acc
            }
            None => self.coefficients.dot(&x),
        })
    }

    pub fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if xs.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                what: "prediction input",
                expected: self.n_features(),
                actual: xs.ncols(),
            });
        }
        Ok(match &self.centering {
            Some(c) => {
                let shifted = xs.dot(&self.coefficients);
                let offset = c.z_mean - c.x_mean.dot(&self.coefficients);
                shifted + offset
            }
            None => xs.dot(&self.coefficients),
        })
    }
}

/// Fit ridge coefficients (X^T X + lambda I)^(-1) X^T z, via the dual form
/// X^T (X X^T + lambda I)^(-1) z when n < p (identical for lambda > 0).
pub fn fit_ridge(x: ArrayView2<'_, f64>, z: ArrayView1<'_, f64>, params: &RidgeParams) -> Result<RidgeModel> {
    let (n, p) = (x.nrows(), x.ncols());
    if n == 0 || p == 0 {
        return Err(Error::InsufficientData(format!(
            "ridge needs at least one row and one feature, got {n}x{p}"
        )));
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            what: "responses",
            expected: n,
            actual: z.len(),
        });
    }
    if !params.lambda.is_finite() || params.lambda < 0.0 {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite and >= 0, got {}",
            params.lambda
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("responses"));
    }

    let (xw, zw, centering) = if params.center {
        let x_mean = x.mean_axis(Axis(0)).expect("n >= 1");
        let z_mean = z.iter().sum::<f64>() / n as f64;
        let xc = &x - &x_mean.view().insert_axis(Axis(0));
        let zc = z.to_owned() - z_mean;
        (xc, zc, Some(Centering { x_mean, z_mean }))
    } else {
        (x.to_owned(), z.to_owned(), None)
    };

    let (coefficients, factor, form) = if p <= n {
        let mut gram = xw.t().dot(&xw);
        for i in 0..p {
            gram[[i, i]] += params.lambda;
        }
        let factor = cholesky(gram.view())?;
        let xtz = xw.t().dot(&zw);
        let beta = factor.solve(xtz.view())?;
        (beta, factor, GramForm::Primal)
    } else {
        let mut gram = xw.dot(&xw.t());
        for i in 0..n {
            gram[[i, i]] += params.lambda;
        }
        let factor = cholesky(gram.view())?;
        let alpha = factor.solve(zw.view())?;
        (xw.t().dot(&alpha), factor, GramForm::Dual)
    };

    Ok(RidgeModel {
        params: *params,
        coefficients,
        centering,
        context: Some(SmootherContext { x: xw, factor, form }),
    })
}

/// Smoother weights h(x) with h(x) . z == predict(x) for the training
/// responses z the model was fit on. Depends only on the training features and
/// lambda, never on the responses.
pub fn smoother_weights(model: &RidgeModel, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if x.len() != model.n_features() {
        return Err(Error::DimensionMismatch {
            what: "smoother input",
            expected: model.n_features(),
            actual: x.len(),
        });
    }
    let ctx = model.context.as_ref().ok_or_else(|| {
        Error::InvalidParams(
            "smoother weights need the training context; deserialized models do not retain it"
                .to_string(),
        )
    })?;
    let xq = match model.center_stats() {
        Some((x_mean, _)) => &x.to_owned() - &x_mean,
        None => x.to_owned(),
    };
    let w = match ctx.form {
        GramForm::Primal => {
            let g_inv_x = ctx.factor.solve(xq.view())?;
            ctx.x.dot(&g_inv_x)
        }
        GramForm::Dual => {
            let xx = ctx.x.dot(&xq);
            ctx.factor.solve(xx.view())?
        }
    };
    Ok(match model.center_stats() {
        // Centered prediction is still linear in z:
        // h = w + (1 - sum(w)) / n * ones.
        Some(_) => {
            let n = w.len() as f64;
            let shift = (1.0 - w.sum()) / n;
            w + shift
        }
        None => w,
    })
}
