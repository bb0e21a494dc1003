//! Frozen source models.
//!
//! A source predictor is any deterministic function of the features; the
//! transfer machinery only ever asks it for predictions. Implementations here
//! cover the synthetic task families plus a pure-noise source for negative
//! controls. Fitted models also implement the trait (see `learners`).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Deterministic predictor used as the frozen source model.
pub trait SourcePredictor: Sync {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64;

    /// Row-wise predictions. Implementations may override with a batched path;
    /// the result must equal row-by-row `predict`.
    fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Array1<f64> {
        Array1::from_iter(xs.rows().into_iter().map(|r| self.predict(r)))
    }
}

impl<T: SourcePredictor + ?Sized> SourcePredictor for &T {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        (**self).predict(x)
    }
    fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Array1<f64> {
        (**self).predict_batch(xs)
    }
}

/// Linear model f(x) = theta . x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSource {
    theta: Array1<f64>,
}

impl LinearSource {
    pub fn new(theta: Array1<f64>) -> Self {
        Self { theta }
    }

    pub fn theta(&self) -> ArrayView1<'_, f64> {
        self.theta.view()
    }
}

impl SourcePredictor for LinearSource {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.theta.dot(&x)
    }

    fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Array1<f64> {
        xs.dot(&self.theta)
    }
}

/// One-hidden-layer ReLU network f(x) = b . max(0, A x).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReluSource {
    a: Array2<f64>,
    b: Array1<f64>,
}

impl ReluSource {
    /// `a` is width x p, `b` has length width.
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Self {
        assert_eq!(a.nrows(), b.len(), "hidden width mismatch");
        Self { a, b }
    }

    pub fn input_dim(&self) -> usize {
        self.a.ncols()
    }
}

impl SourcePredictor for ReluSource {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let h = self.a.dot(&x);
        h.iter()
            .zip(self.b.iter())
            .map(|(&hi, &bi)| bi * hi.max(0.0))
            .sum()
    }
}

/// Source that returns reproducible noise unrelated to any target: a hash of
/// the feature bits seeds a one-shot generator. Same x, same output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashNoiseSource {
    seed: u64,
    scale: f64,
}

impl HashNoiseSource {
    pub fn new(seed: u64, scale: f64) -> Self {
        Self { seed, scale }
    }
}

impl SourcePredictor for HashNoiseSource {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for &v in x.iter() {
            h ^= v.to_bits();
            h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
            h ^= h >> 31;
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(h);
        let n: f64 = StandardNormal.sample(&mut rng);
        self.scale * n
    }
}
