use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// A supervised regression sample: an n x p feature matrix with n targets.
///
/// Construction validates shape agreement and finiteness, so downstream code
/// can rely on both.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array1<f64>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, targets: Array1<f64>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InsufficientData(format!(
                "dataset must have at least one row and one feature, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if targets.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                what: "targets",
                expected: features.nrows(),
                actual: targets.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        Ok(Self { features, targets })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn targets(&self) -> ArrayView1<'_, f64> {
        self.targets.view()
    }

    /// Row-subset copy, in the order given. Indices must be in range.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &r in rows {
            if r >= self.n() {
                return Err(Error::InvalidParams(format!(
                    "row index {r} out of range for {} rows",
                    self.n()
                )));
            }
        }
        let features = self.features.select(ndarray::Axis(0), rows);
        let targets = Array1::from_iter(rows.iter().map(|&r| self.targets[r]));
        Self::new(features, targets)
    }
}
