//! Dense symmetric positive definite solves.
//!
//! The only factorization the crate needs is a Cholesky of a regularized Gram
//! matrix (at most a few hundred rows), so it is implemented directly on
//! ndarray rather than pulling in a LAPACK binding.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub(crate) struct CholeskyFactor {
    l: Array2<f64>,
}

/// Factor a symmetric positive definite matrix as L * L^T.
///
/// Fails with `NumericalFailure` when a pivot is non-positive or non-finite,
/// which for our callers means the input was not SPD (or contained NaN).
pub(crate) fn cholesky(a: ArrayView2<'_, f64>) -> Result<CholeskyFactor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "cholesky input (square matrix)",
            expected: n,
            actual: a.ncols(),
        });
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(Error::NumericalFailure(format!(
                        "cholesky pivot {i} is {s:e}; matrix is not positive definite"
                    )));
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(CholeskyFactor { l })
}

impl CholeskyFactor {
    pub(crate) fn n(&self) -> usize {
        self.l.nrows()
    }

    /// Solve (L L^T) x = b.
    pub(crate) fn solve(&self, b: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let n = self.n();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "cholesky solve rhs",
                expected: n,
                actual: b.len(),
            });
        }
        // Forward substitution: L y = b.
        let mut y = b.to_owned();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[[i, k]] * y[k];
            }
            y[i] = s / self.l[[i, i]];
        }
        // Back substitution: L^T x = y.
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[[k, i]] * y[k];
            }
            y[i] = s / self.l[[i, i]];
        }
        Ok(y)
    }
}
