//! Bias/variance analysis of the blended predictor for linear smoothers.
//!
//! For a base learner whose fit is linear in the targets (ridge), the
//! pointwise error of the blended predictor splits into contributions from
//! the source gap `D`, two smoothing biases `B1` and `B2`, and a smoothing
//! variance `V`. Averaging those over evaluation points gives a small set of
//! second moments from which the expected MSE, the optimal blend weight, and
//! the matched transform weight all have closed forms.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::learners::{fit, smoother_weights, LearnerSpec, RidgeModel};
use crate::rng::{derive_rng, SeedStream};
use crate::source::SourcePredictor;
use crate::transfer::TransferHyperparams;
use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use serde::Serialize;

/// Default number of evaluation points for moment estimation.
pub const DEFAULT_EVAL_POINTS: usize = 500;

/// Default number of bootstrap replicates for variance estimation.
pub const DEFAULT_N_BOOT: usize = 100;

/// Error components of a linear smoother at one evaluation point:
/// `d` the target/source gap, `b1` and `b2` the smoothing biases of the
/// target and source functions, `v` the prediction variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointComponents {
    pub d: f64,
    pub b1: f64,
    pub b2: f64,
    pub v: f64,
}

/// Second moments of the error components over evaluation points, plus the
/// observation-noise variance.
///
/// Constructed values are validated: squared moments, `e_v`, and
/// `sigma_eps2` must be non-negative and every cross moment must satisfy
/// Cauchy-Schwarz against its marginals (with a small slack for round-off).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    e_d2: f64,
    e_b1_2: f64,
    e_b2_2: f64,
    e_db1: f64,
    e_db2: f64,
    e_b1b2: f64,
    e_v: f64,
    sigma_eps2: f64,
}

const CS_SLACK: f64 = 1e-9;

impl MomentSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e_d2: f64,
        e_b1_2: f64,
        e_b2_2: f64,
        e_db1: f64,
        e_db2: f64,
        e_b1b2: f64,
        e_v: f64,
        sigma_eps2: f64,
    ) -> Result<Self> {
        let all = [e_d2, e_b1_2, e_b2_2, e_db1, e_db2, e_b1b2, e_v, sigma_eps2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moment"));
        }
        for (name, v) in [
            ("e_d2", e_d2),
            ("e_b1_2", e_b1_2),
            ("e_b2_2", e_b2_2),
            ("e_v", e_v),
            ("sigma_eps2", sigma_eps2),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        let cs = [
            ("e_db1", e_db1, e_d2, e_b1_2),
            ("e_db2", e_db2, e_d2, e_b2_2),
            ("e_b1b2", e_b1b2, e_b1_2, e_b2_2),
        ];
        for (name, cross, m1, m2) in cs {
            let bound = m1 * m2;
            if cross * cross > bound * (1.0 + CS_SLACK) + CS_SLACK {
                return Err(Error::InvalidParams(format!(
                    "{name}^2 = {} exceeds its Cauchy-Schwarz bound {bound}",
                    cross * cross
                )));
            }
        }
        Ok(Self {
            e_d2,
            e_b1_2,
            e_b2_2,
            e_db1,
            e_db2,
            e_b1b2,
            e_v,
            sigma_eps2,
        })
    }

    /// The moments after multiplying the gap `D` pointwise by `scale`:
    /// `e_d2` picks up `scale^2`, the two `D` cross moments pick up `scale`.
    pub fn scaled_gap(&self, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        Self::new(
            self.e_d2 * scale * scale,
            self.e_b1_2,
            self.e_b2_2,
            self.e_db1 * scale,
            self.e_db2 * scale,
            self.e_b1b2,
            self.e_v,
            self.sigma_eps2,
        )
    }

    pub fn e_d2(&self) -> f64 {
        self.e_d2
    }
    pub fn e_b1_2(&self) -> f64 {
        self.e_b1_2
    }
    pub fn e_b2_2(&self) -> f64 {
        self.e_b2_2
    }
    pub fn e_db1(&self) -> f64 {
        self.e_db1
    }
    pub fn e_db2(&self) -> f64 {
        self.e_db2
    }
    pub fn e_b1b2(&self) -> f64 {
        self.e_b1b2
    }
    pub fn e_v(&self) -> f64 {
        self.e_v
    }
    pub fn sigma_eps2(&self) -> f64 {
        self.sigma_eps2
    }
}

fn check_sigma(sigma_eps2: f64) -> Result<()> {
    if !sigma_eps2.is_finite() || sigma_eps2 < 0.0 {
        return Err(Error::InvalidParams(format!(
            "sigma_eps2 must be finite and >= 0, got {sigma_eps2}"
        )));
    }
    Ok(())
}

fn blend_coeffs(hp: TransferHyperparams) -> (f64, f64) {
    let (tau, rho) = (hp.tau(), hp.rho());
    ((rho - tau) / (1.0 - tau), (1.0 - rho) / (1.0 - tau))
}

/// Pointwise expected squared error of the blended predictor at one
/// evaluation point: with a = (rho - tau) / (1 - tau) and
/// b = (1 - rho) / (1 - tau),
///
/// mse = (a d + b b1 - tau b b2)^2 + b^2 v + sigma_eps2.
pub fn mse_at(hp: TransferHyperparams, c: &PointComponents, sigma_eps2: f64) -> Result<f64> {
    check_sigma(sigma_eps2)?;
    let (a, b) = blend_coeffs(hp);
    let bias = a * c.d + b * c.b1 - hp.tau() * b * c.b2;
    Ok(bias * bias + b * b * c.v + sigma_eps2)
}

/// Sample means of the componentwise products, with the noise variance
/// carried through.
pub fn estimate_moments(components: &[PointComponents], sigma_eps2: f64) -> Result<MomentSet> {
    if components.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = components.len() as f64;
    let mut s = [0.0_f64; 7];
    for c in components {
        s[0] += c.d * c.d;
        s[1] += c.b1 * c.b1;
        s[2] += c.b2 * c.b2;
        s[3] += c.d * c.b1;
        s[4] += c.d * c.b2;
        s[5] += c.b1 * c.b2;
        s[6] += c.v;
    }
    MomentSet::new(
        s[0] / n,
        s[1] / n,
        s[2] / n,
        s[3] / n,
        s[4] / n,
        s[5] / n,
        s[6] / n,
        sigma_eps2,
    )
}

/// Expected MSE averaged over evaluation points, written in the moments:
/// expanding the square in `mse_at` and averaging termwise gives
///
/// a^2 E[D^2] + b^2 E[B1^2] + tau^2 b^2 E[B2^2] + 2ab E[DB1]
///   - 2 tau a b E[DB2] - 2 tau b^2 E[B1B2] + b^2 E[V] + sigma_eps2.
pub fn expected_mse(hp: TransferHyperparams, m: &MomentSet) -> f64 {
    let (a, b) = blend_coeffs(hp);
    let tau = hp.tau();
    let bias2 = a * a * m.e_d2
        + b * b * m.e_b1_2
        + tau * tau * b * b * m.e_b2_2
        + 2.0 * a * b * m.e_db1
        - 2.0 * tau * a * b * m.e_db2
        - 2.0 * tau * b * b * m.e_b1b2;
    bias2 + b * b * m.e_v + m.sigma_eps2
}

/// Blend weight minimizing `expected_mse` at fixed `tau`, clipped to [0, 1].
///
/// Setting the rho derivative of the expected MSE to zero gives a linear
/// equation; expanded over the moments the solution is
///
///   rho*(tau) = (tau E[D^2] - (1 + tau) E[DB1] + (tau^2 + tau) E[DB2]
///                + E[B1^2] + tau^2 E[B2^2] - 2 tau E[B1B2] + E[V])
///             / (E[D^2] - 2 E[DB1] + 2 tau E[DB2]
///                + E[B1^2] + tau^2 E[B2^2] - 2 tau E[B1B2] + E[V]),
///
/// whose denominator is the non-negative quadratic form
/// E[(D - B1 + tau B2)^2] + E[V]; it vanishes only when the expected MSE
/// does not depend on rho at all.
pub fn rho_star(tau: f64, m: &MomentSet) -> Result<f64> {
    if !tau.is_finite() || tau >= 1.0 {
        return Err(Error::TauOutOfRange(tau));
    }
    let num = tau * m.e_d2 - (tau + 1.0) * m.e_db1 + (tau * tau + tau) * m.e_db2 + m.e_b1_2
        - 2.0 * tau * m.e_b1b2
        + tau * tau * m.e_b2_2
        + m.e_v;
    let den = m.e_d2 - 2.0 * m.e_db1 + 2.0 * tau * m.e_db2 + m.e_b1_2 + tau * tau * m.e_b2_2
        - 2.0 * tau * m.e_b1b2
        + m.e_v;
    if den <= 1e-300 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Transform weight paired with a given blend weight at a joint stationary
/// point of the expected MSE:
///
/// tau(rho) = ((1 - rho) E[B1B2] + rho E[DB2]) / ((1 - rho) E[B2^2] + E[DB2]).
///
/// The value is returned unclipped; rho must lie in [0, 1).
pub fn tau_of_rho(rho: f64, m: &MomentSet) -> Result<f64> {
    if !rho.is_finite() || !(0.0..1.0).contains(&rho) {
        return Err(Error::RhoOutOfRange(rho));
    }
    let num = (1.0 - rho) * m.e_b1b2 + rho * m.e_db2;
    let den = (1.0 - rho) * m.e_b2_2 + m.e_db2;
    if den.abs() <= 1e-300 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Estimate the error components at each evaluation point for a fitted ridge
/// smoother: `d` and the biases come from evaluating the true target and
/// source functions on the training rows and weighting them by the smoother
/// weights; `v` is `sigma_eps2` times the squared weight norm.
pub fn estimate_components(
    eval_points: ArrayView2<f64>,
    f_t: &dyn SourcePredictor,
    f_s: &dyn SourcePredictor,
    smoother: &RidgeModel,
    train_features: ArrayView2<f64>,
    sigma_eps2: f64,
) -> Result<Vec<PointComponents>> {
    check_sigma(sigma_eps2)?;
    if eval_points.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if eval_points.ncols() != train_features.ncols() {
        return Err(Error::DimensionMismatch {
            what: "evaluation point width",
            expected: train_features.ncols(),
            actual: eval_points.ncols(),
        });
    }
    let ft_train = f_t.predict_batch(train_features);
    let fs_train = f_s.predict_batch(train_features);
    let ft_eval = f_t.predict_batch(eval_points);
    let fs_eval = f_s.predict_batch(eval_points);

    let rows = map_indexed(eval_points.nrows(), |i| -> Result<PointComponents> {
        let h = smoother_weights(smoother, eval_points.row(i))?;
        let b1 = ft_eval[i] - h.dot(&ft_train);
        let b2 = fs_eval[i] - h.dot(&fs_train);
        let v = sigma_eps2 * h.dot(&h);
        Ok(PointComponents {
            d: ft_eval[i] - fs_eval[i],
            b1,
            b2,
            v,
        })
    });
    rows.into_iter().collect()
}

/// Per-point bootstrap variance of base-learner predictions: refit on
/// resampled rows `n_boot` times and take the sample variance (n - 1
/// denominator) of the predictions at each evaluation point. Replicate `b`
/// draws from its own counter-derived stream, so results do not depend on
/// evaluation order.
pub fn bootstrap_variance(
    train: &Dataset,
    learner: &LearnerSpec,
    eval_points: ArrayView2<f64>,
    n_boot: usize,
    seed: u64,
) -> Result<Array1<f64>> {
    let n = train.n();
    if eval_points.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if eval_points.ncols() != train.p() {
        return Err(Error::DimensionMismatch {
            what: "evaluation point width",
            expected: train.p(),
            actual: eval_points.ncols(),
        });
    }
    if n_boot < 2 {
        return Err(Error::InsufficientData(format!(
            "n_boot must be at least 2, got {n_boot}"
        )));
    }

    let x = train.features();
    let z = train.targets();
    let replicates = map_indexed(n_boot, |b| -> Result<Array1<f64>> {
        let mut rng = derive_rng(seed, SeedStream::Bootstrap, b as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let xb = x.select(ndarray::Axis(0), &rows);
        let zb = Array1::from_iter(rows.iter().map(|&r| z[r]));
        let model = fit(learner, xb.view(), zb.view())?;
        model.predict_batch(eval_points)
    });

    let mut preds = Array2::zeros((n_boot, eval_points.nrows()));
    for (b, rep) in replicates.into_iter().enumerate() {
        preds.row_mut(b).assign(&rep?);
    }
    let mut out = Array1::zeros(eval_points.nrows());
    for (j, col) in preds.columns().into_iter().enumerate() {
        let mean = col.sum() / n_boot as f64;
        let ss = col.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>();
        out[j] = ss / (n_boot - 1) as f64;
    }
    Ok(out)
}

/// One row of the gap-scaling sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticRow {
    pub scale: f64,
    pub tau: f64,
    pub rho_star: f64,
    /// |rho_star - tau|.
    pub gap: f64,
}

/// Sweep the gap scale: for each scale the base moments have `D` multiplied
/// by that factor, and for each tau the optimal blend weight is computed. As
/// the scale grows the optimum is driven onto the diagonal rho = tau, which
/// the `gap` column tracks. Scales must be positive and strictly increasing.
pub fn asymptotic_report(
    base: &MomentSet,
    scales: &[f64],
    taus: &[f64],
) -> Result<Vec<AsymptoticRow>> {
    if taus.is_empty() || scales.is_empty() {
        return Err(Error::EmptyInput);
    }
    for w in scales.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParams(format!(
                "scales must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut rows = Vec::with_capacity(taus.len() * scales.len());
    for &scale in scales {
        let scaled = base.scaled_gap(scale)?;
        for &tau in taus {
            let rs = rho_star(tau, &scaled)?;
            rows.push(AsymptoticRow {
                scale,
                tau,
                rho_star: rs,
                gap: (rs - tau).abs(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{fit_ridge, RidgeParams};
    use crate::source::LinearSource;
    use ndarray::array;
    use rand_distr::{Distribution, StandardNormal};

    fn hp(tau: f64, rho: f64) -> TransferHyperparams {
        TransferHyperparams::new(tau, rho).unwrap()
    }

    fn random_components(seed: u64, n: usize) -> Vec<PointComponents> {
        let mut rng = derive_rng(seed, SeedStream::Weights, 0);
        (0..n)
            .map(|_| {
                let d: f64 = StandardNormal.sample(&mut rng);
                let b1: f64 = StandardNormal.sample(&mut rng);
                let b2: f64 = StandardNormal.sample(&mut rng);
                let v: f64 = rng.gen_range(0.0..2.0);
                PointComponents {
                    d: 2.0 * d,
                    b1,
                    b2: 0.5 * b2,
                    v,
                }
            })
            .collect()
    }

    #[test]
    fn mse_at_special_points() {
        let c = PointComponents {
            d: 3.0,
            b1: 1.5,
            b2: -0.5,
            v: 0.25,
        };
        let s2 = 0.7;
        // All-zero components leave only the noise floor.
        let zero = PointComponents {
            d: 0.0,
            b1: 0.0,
            b2: 0.0,
            v: 0.0,
        };
        for (tau, rho) in [(-1.0, 0.3), (0.0, 0.0), (0.5, 1.0)] {
            assert_eq!(mse_at(hp(tau, rho), &zero, s2).unwrap(), s2);
        }
        // (0, 0): plain smoother, mse = b1^2 + v + sigma^2.
        let got = mse_at(hp(0.0, 0.0), &c, s2).unwrap();
        assert!((got - (c.b1 * c.b1 + c.v + s2)).abs() < 1e-15);
        // rho = 1: direct source, mse = d^2 + sigma^2 for any tau.
        for tau in [-1.0, 0.0, 0.5] {
            let got = mse_at(hp(tau, 1.0), &c, s2).unwrap();
            assert!((got - (c.d * c.d + s2)).abs() < 1e-12);
        }
        // Diagonal tau = rho: a = 0, b = 1, mse = (b1 - tau b2)^2 + v + s2.
        for t in [0.25, 0.5, 0.75] {
            let got = mse_at(hp(t, t), &c, s2).unwrap();
            let bias = c.b1 - t * c.b2;
            assert!((got - (bias * bias + c.v + s2)).abs() < 1e-12);
        }
    }

    #[test]
    fn mse_in_rho_is_an_upward_quadratic() {
        // Three-point interpolation at fixed tau reproduces mse_at exactly.
        let c = PointComponents {
            d: 1.2,
            b1: -0.4,
            b2: 0.9,
            v: 0.6,
        };
        let s2 = 0.3;
        for tau in [-0.8, 0.0, 0.5] {
            let f0 = mse_at(hp(tau, 0.0), &c, s2).unwrap();
            let fhalf = mse_at(hp(tau, 0.5), &c, s2).unwrap();
            let f1 = mse_at(hp(tau, 1.0), &c, s2).unwrap();
            // Lagrange coefficients on {0, 1/2, 1}.
            let quad = |r: f64| {
                f0 * (r - 0.5) * (r - 1.0) / ((0.0 - 0.5) * (0.0 - 1.0))
                    + fhalf * (r - 0.0) * (r - 1.0) / ((0.5 - 0.0) * (0.5 - 1.0))
                    + f1 * (r - 0.0) * (r - 0.5) / ((1.0 - 0.0) * (1.0 - 0.5))
            };
            let lead = 2.0 * (f0 - 2.0 * fhalf + f1);
            assert!(lead >= -1e-12, "leading coefficient {lead}");
            for r in [0.1, 0.3, 0.7, 0.9] {
                let direct = mse_at(hp(tau, r), &c, s2).unwrap();
                assert!((quad(r) - direct).abs() <= 1e-10 * (1.0 + direct));
            }
        }
    }

    #[test]
    fn expected_mse_is_mean_of_pointwise_mse() {
        // The moment expansion must agree with averaging mse_at exactly.
        let comps = random_components(10, 64);
        let s2 = 1.3;
        let m = estimate_moments(&comps, s2).unwrap();
        for (tau, rho) in [(-0.5, 0.0), (0.0, 0.0), (0.3, 0.7), (0.5, 0.5), (0.0, 1.0)] {
            let h = hp(tau, rho);
            let mean = comps
                .iter()
                .map(|c| mse_at(h, c, s2).unwrap())
                .sum::<f64>()
                / comps.len() as f64;
            let closed = expected_mse(h, &m);
            assert!(
                (closed - mean).abs() <= 1e-12 * (1.0 + mean.abs()),
                "({tau}, {rho}): {closed} vs {mean}"
            );
        }
    }

    #[test]
    fn moment_validation_rejects_inconsistent_values() {
        assert!(MomentSet::new(-1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(MomentSet::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, -0.1, 0.0).is_err());
        assert!(MomentSet::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0).is_err());
        // e_db1^2 > e_d2 * e_b1_2 violates Cauchy-Schwarz.
        assert!(MomentSet::new(1.0, 1.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(MomentSet::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, f64::NAN, 0.0).is_err());
        assert!(MomentSet::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.5).is_ok());
    }

    #[test]
    fn single_point_moments_match_hand_values() {
        let m = estimate_moments(
            &[PointComponents {
                d: 2.0,
                b1: 0.0,
                b2: 1.0,
                v: 3.0,
            }],
            0.25,
        )
        .unwrap();
        assert_eq!(m.e_d2(), 4.0);
        assert_eq!(m.e_db2(), 2.0);
        assert_eq!(m.e_b2_2(), 1.0);
        assert_eq!(m.e_v(), 3.0);
        assert_eq!(m.e_b1_2(), 0.0);
        assert_eq!(m.e_db1(), 0.0);
        assert_eq!(m.e_b1b2(), 0.0);
        assert_eq!(m.sigma_eps2(), 0.25);
    }

    #[test]
    fn all_zero_components_give_zero_moments() {
        let zero = PointComponents {
            d: 0.0,
            b1: 0.0,
            b2: 0.0,
            v: 0.0,
        };
        let m = estimate_moments(&[zero; 5], 0.0).unwrap();
        for v in [
            m.e_d2(),
            m.e_b1_2(),
            m.e_b2_2(),
            m.e_db1(),
            m.e_db2(),
            m.e_b1b2(),
            m.e_v(),
        ] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn from_components_matches_hand_means() {
        let comps = vec![
            PointComponents {
                d: 1.0,
                b1: 2.0,
                b2: 0.0,
                v: 0.5,
            },
            PointComponents {
                d: 3.0,
                b1: 0.0,
                b2: 1.0,
                v: 1.5,
            },
        ];
        let m = estimate_moments(&comps, 0.0).unwrap();
        assert_eq!(m.e_d2(), 5.0);
        assert_eq!(m.e_b1_2(), 2.0);
        assert_eq!(m.e_b2_2(), 0.5);
        assert_eq!(m.e_db1(), 1.0);
        assert_eq!(m.e_db2(), 1.5);
        assert_eq!(m.e_b1b2(), 0.0);
        assert_eq!(m.e_v(), 1.0);
    }

    #[test]
    fn rho_star_clips_negative_optimum_to_zero() {
        // Single point d = 3, b1 = 1, b2 = 0, v = 0 at tau = 0: the
        // unconstrained optimum is (e_b1_2 - e_db1) / (e_d2 - 2 e_db1 +
        // e_b1_2) = (1 - 3) / (9 - 6 + 1) = -0.5.
        let m = estimate_moments(
            &[PointComponents {
                d: 3.0,
                b1: 1.0,
                b2: 0.0,
                v: 0.0,
            }],
            0.0,
        )
        .unwrap();
        assert_eq!(rho_star(0.0, &m).unwrap(), 0.0);
        // Clipping is correct: the constrained optimum at 0 beats points
        // just inside the interval.
        let at0 = expected_mse(hp(0.0, 0.0), &m);
        let at005 = expected_mse(hp(0.0, 0.05), &m);
        assert!(at0 <= at005);
    }

    #[test]
    fn rho_star_is_one_when_gap_vanishes() {
        let m = MomentSet::new(0.0, 0.8, 0.3, 0.0, 0.0, 0.2, 0.4, 0.0).unwrap();
        for tau in [-1.0, 0.0, 0.5, 0.9] {
            let rs = rho_star(tau, &m).unwrap();
            assert!((rs - 1.0).abs() <= 1e-12, "tau = {tau}: {rs}");
        }
    }

    #[test]
    fn rho_star_approaches_one_under_huge_variance() {
        let m = MomentSet::new(4.0, 1.0, 0.25, 1.0, 0.5, 0.3, 1e15, 0.0).unwrap();
        let rs = rho_star(0.2, &m).unwrap();
        assert!((rs - 1.0).abs() <= 1e-9, "{rs}");
    }

    #[test]
    fn rho_star_matches_grid_argmin() {
        // Brute force over rho at fixed tau using expected_mse directly.
        let comps = random_components(21, 40);
        let m = estimate_moments(&comps, 0.0).unwrap();
        for tau in [-0.5, 0.0, 0.4] {
            let rs = rho_star(tau, &m).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=10_000 {
                let rho = i as f64 / 10_000.0;
                let v = expected_mse(hp(tau, rho), &m);
                if v < best.0 {
                    best = (v, rho);
                }
            }
            assert!((rs - best.1).abs() <= 1e-3, "tau {tau}: {rs} vs {}", best.1);
        }
    }

    #[test]
    fn rho_star_rejects_bad_tau_and_degenerate_moments() {
        let m = MomentSet::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(rho_star(1.0, &m), Err(Error::TauOutOfRange(_))));
        let zero = MomentSet::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            rho_star(0.0, &zero),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn tau_of_rho_satisfies_the_stationarity_identity() {
        let comps = random_components(33, 50);
        let m = estimate_moments(&comps, 0.0).unwrap();
        for rho in [0.0, 0.2, 0.5, 0.9] {
            let tau = tau_of_rho(rho, &m).unwrap();
            let resid = (rho - tau) * m.e_db2() + (1.0 - rho) * m.e_b1b2()
                - tau * (1.0 - rho) * m.e_b2_2();
            assert!(resid.abs() <= 1e-9 * (1.0 + tau.abs()), "rho {rho}: {resid}");
        }
    }

    #[test]
    fn tau_of_rho_is_zero_when_its_numerator_moments_vanish() {
        let m = MomentSet::new(1.0, 1.0, 0.7, 0.3, 0.0, 0.0, 0.2, 0.0).unwrap();
        for rho in [0.0, 0.3, 0.8, 0.99] {
            assert_eq!(tau_of_rho(rho, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn tau_of_rho_approaches_rho_for_huge_gap() {
        let base = MomentSet::new(1.0, 0.5, 0.4, 0.2, 0.3, 0.15, 0.3, 0.0).unwrap();
        let scaled = base.scaled_gap(1e8).unwrap();
        for rho in [0.2, 0.5, 0.9] {
            let tau = tau_of_rho(rho, &scaled).unwrap();
            assert!((tau - rho).abs() <= 1e-6, "rho {rho}: tau {tau}");
        }
    }

    #[test]
    fn tau_of_rho_rejects_rho_one_and_degenerate_cases() {
        let m = MomentSet::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(tau_of_rho(1.0, &m), Err(Error::RhoOutOfRange(_))));
        assert!(matches!(tau_of_rho(-0.1, &m), Err(Error::RhoOutOfRange(_))));
        // b2 identically zero: both e_b2_2 and e_db2 vanish.
        let degenerate = MomentSet::new(1.0, 1.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            tau_of_rho(0.5, &degenerate),
            Err(Error::DegenerateDenominator)
        ));
    }

    fn training_design(seed: u64, n: usize, p: usize) -> Array2<f64> {
        let mut rng = derive_rng(seed, SeedStream::Features, 0);
        Array2::from_shape_fn((n, p), |_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g
        })
    }

    #[test]
    fn components_vanish_for_linear_truth_and_tiny_ridge() {
        // With p < n and lambda -> 0 the smoother reproduces any linear
        // function, so b1 and b2 must vanish and d is exact.
        let x = training_design(3, 30, 4);
        let theta_t = array![1.0, -1.0, 0.5, 2.0];
        let theta_s = array![1.0, -1.0, 0.0, 1.0];
        let z = x.dot(&theta_t);
        let smoother = fit_ridge(x.view(), z.view(), &RidgeParams::with_lambda(1e-10)).unwrap();
        let eval = training_design(4, 20, 4);
        let comps = estimate_components(
            eval.view(),
            &LinearSource::new(theta_t.clone()),
            &LinearSource::new(theta_s.clone()),
            &smoother,
            x.view(),
            1.0,
        )
        .unwrap();
        for (i, c) in comps.iter().enumerate() {
            let expect_d = eval.row(i).dot(&theta_t) - eval.row(i).dot(&theta_s);
            assert!((c.d - expect_d).abs() <= 1e-12);
            assert!(c.b1.abs() <= 1e-6, "b1[{i}] = {}", c.b1);
            assert!(c.b2.abs() <= 1e-6, "b2[{i}] = {}", c.b2);
            assert!(c.v >= 0.0);
        }
    }

    #[test]
    fn identical_functions_have_zero_gap_and_equal_biases() {
        let x = training_design(17, 25, 3);
        let theta = array![0.9, -0.3, 0.4];
        let z = Array1::from_shape_fn(25, |i| (x.row(i)[0] + x.row(i)[1]).sin());
        let smoother = fit_ridge(x.view(), z.view(), &RidgeParams::with_lambda(0.3)).unwrap();
        let eval = training_design(18, 10, 3);
        let f = LinearSource::new(theta);
        let comps =
            estimate_components(eval.view(), &f, &f, &smoother, x.view(), 0.5).unwrap();
        for c in &comps {
            assert_eq!(c.d, 0.0);
            assert_eq!(c.b1.to_bits(), c.b2.to_bits());
        }
    }

    #[test]
    fn component_variance_uses_weight_norm() {
        let x = training_design(5, 25, 3);
        let z = Array1::from_shape_fn(25, |i| i as f64);
        let smoother = fit_ridge(x.view(), z.view(), &RidgeParams::with_lambda(0.5)).unwrap();
        let eval = training_design(6, 5, 3);
        let s2 = 2.5;
        let comps = estimate_components(
            eval.view(),
            &LinearSource::new(array![1.0, 0.0, 0.0]),
            &LinearSource::new(array![0.0, 1.0, 0.0]),
            &smoother,
            x.view(),
            s2,
        )
        .unwrap();
        for (i, c) in comps.iter().enumerate() {
            let h = smoother_weights(&smoother, eval.row(i)).unwrap();
            assert!((c.v - s2 * h.dot(&h)).abs() <= 1e-12 * (1.0 + c.v));
        }
    }

    #[test]
    fn moments_are_stable_across_disjoint_eval_draws() {
        // Two disjoint 500-point draws must give similar moment estimates.
        let p = 6;
        let x = training_design(7, 40, p);
        let theta_t = Array1::from_shape_fn(p, |i| 1.0 - 0.3 * i as f64);
        let theta_s = Array1::from_shape_fn(p, |i| 0.8 - 0.25 * i as f64);
        let z = x.dot(&theta_t);
        let smoother = fit_ridge(x.view(), z.view(), &RidgeParams::with_lambda(0.2)).unwrap();
        let ft = LinearSource::new(theta_t);
        let fs = LinearSource::new(theta_s);
        let mut rng = derive_rng(8, SeedStream::EvalFeatures, 0);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            Array2::from_shape_fn((DEFAULT_EVAL_POINTS, p), |_| {
                let g: f64 = StandardNormal.sample(rng);
                g
            })
        };
        let e1 = draw(&mut rng);
        let e2 = draw(&mut rng);
        let m1 = estimate_moments(
            &estimate_components(e1.view(), &ft, &fs, &smoother, x.view(), 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        let m2 = estimate_moments(
            &estimate_components(e2.view(), &ft, &fs, &smoother, x.view(), 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        for (a, b) in [
            (m1.e_d2(), m2.e_d2()),
            (m1.e_b1_2(), m2.e_b1_2()),
            (m1.e_b2_2(), m2.e_b2_2()),
            (m1.e_v(), m2.e_v()),
        ] {
            assert!((a - b).abs() <= 0.15 * a.abs().max(b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn bootstrap_variance_is_seeded_and_sane() {
        let x = training_design(9, 40, 3);
        let mut rng = derive_rng(9, SeedStream::Noise, 0);
        let z = Array1::from_shape_fn(40, |i| {
            let g: f64 = StandardNormal.sample(&mut rng);
            x.row(i)[0] + g
        });
        let train = Dataset::new(x, z).unwrap();
        let eval = training_design(10, 6, 3);
        let spec = LearnerSpec::Ridge(RidgeParams::with_lambda(0.1));
        let a = bootstrap_variance(&train, &spec, eval.view(), 30, 4).unwrap();
        let b = bootstrap_variance(&train, &spec, eval.view(), 30, 4).unwrap();
        for (va, vb) in a.iter().zip(b.iter()) {
            assert_eq!(va.to_bits(), vb.to_bits());
            assert!(*va > 0.0);
        }
        let c = bootstrap_variance(&train, &spec, eval.view(), 30, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bootstrap_variance_is_zero_for_constant_fits() {
        let x = training_design(11, 20, 2);
        let z = Array1::zeros(20);
        let train = Dataset::new(x, z).unwrap();
        let eval = training_design(12, 4, 2);
        let spec = LearnerSpec::Ridge(RidgeParams::with_lambda(0.1));
        let v = bootstrap_variance(&train, &spec, eval.view(), 10, 0).unwrap();
        assert!(v.iter().all(|&vi| vi <= 1e-20));
    }

    #[test]
    fn bootstrap_variance_tracks_the_analytic_value_for_ridge() {
        // Fixed design, noisy responses: bootstrap variance should agree
        // with sigma^2 ||h(x)||^2 within a factor of 2.
        let n = 200;
        let p = 4;
        let x = training_design(13, n, p);
        let sigma = 1.0;
        let theta = array![1.0, -0.5, 0.3, 0.8];
        let mut nr = derive_rng(13, SeedStream::Noise, 0);
        let z = Array1::from_shape_fn(n, |i| {
            let g: f64 = StandardNormal.sample(&mut nr);
            x.row(i).dot(&theta) + sigma * g
        });
        let params = RidgeParams::with_lambda(1e-3);
        let smoother = fit_ridge(x.view(), z.view(), &params).unwrap();
        let train = Dataset::new(x.clone(), z).unwrap();
        let eval = training_design(14, 5, p);
        let boot = bootstrap_variance(
            &train,
            &LearnerSpec::Ridge(params),
            eval.view(),
            200,
            3,
        )
        .unwrap();
        for (i, &bv) in boot.iter().enumerate() {
            let h = smoother_weights(&smoother, eval.row(i)).unwrap();
            let analytic = sigma * sigma * h.dot(&h);
            assert!(
                bv <= 2.0 * analytic && bv >= analytic / 2.0,
                "point {i}: bootstrap {bv} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn bootstrap_variance_validates_inputs() {
        let x = training_design(13, 10, 2);
        let z = Array1::zeros(10);
        let train = Dataset::new(x, z).unwrap();
        let eval = training_design(14, 3, 2);
        let spec = LearnerSpec::default_ridge();
        assert!(matches!(
            bootstrap_variance(&train, &spec, eval.view(), 1, 0),
            Err(Error::InsufficientData(_))
        ));
        let bad_eval = training_design(15, 3, 4);
        assert!(bootstrap_variance(&train, &spec, bad_eval.view(), 5, 0).is_err());
    }

    #[test]
    fn asymptotic_gap_shrinks_with_scale() {
        let m = MomentSet::new(1.0, 0.5, 0.4, 0.2, 0.1, 0.15, 0.3, 0.0).unwrap();
        let taus = [0.2, 0.5, 0.8];
        let scales = [1.0, 10.0, 100.0, 1e4];
        let rows = asymptotic_report(&m, &scales, &taus).unwrap();
        assert_eq!(rows.len(), 12);
        for ti in 0..taus.len() {
            let gaps: Vec<f64> = rows
                .iter()
                .filter(|r| r.tau == taus[ti])
                .map(|r| r.gap)
                .collect();
            for w in gaps.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "gaps not shrinking: {gaps:?}");
            }
            assert!(gaps.last().unwrap() < &1e-3);
        }
    }

    #[test]
    fn unit_scale_row_equals_direct_rho_star() {
        let m = MomentSet::new(2.0, 0.7, 0.4, 0.5, 0.3, 0.2, 0.6, 0.0).unwrap();
        let rows = asymptotic_report(&m, &[1.0, 10.0], &[0.2, 0.5]).unwrap();
        for r in rows.iter().filter(|r| r.scale == 1.0) {
            assert_eq!(
                r.rho_star.to_bits(),
                rho_star(r.tau, &m).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn asymptotic_report_requires_increasing_scales() {
        let m = MomentSet::new(1.0, 0.5, 0.4, 0.2, 0.1, 0.15, 0.3, 0.0).unwrap();
        assert!(asymptotic_report(&m, &[10.0, 1.0], &[0.5]).is_err());
        assert!(asymptotic_report(&m, &[1.0, 1.0], &[0.5]).is_err());
        assert!(asymptotic_report(&m, &[-1.0, 1.0], &[0.5]).is_err());
    }
}
