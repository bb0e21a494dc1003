//! Hyperparameter selection: paired k-fold CV over a (tau, rho) grid.
//!
//! Every grid point sees the same seeded fold split, so CV scores are paired
//! and the argmin is meaningful. Grid cells are independent and evaluated in
//! parallel; results are deterministic for a given (dataset, grid, seed).

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::learners::{fit, LearnerSpec};
use crate::rng::{derive_rng, SeedStream};
use crate::source::SourcePredictor;
use crate::transfer::{blend_predict, transform_targets, TransferHyperparams};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Hyperparameter grid. Values are sorted and deduplicated; the diagonal
/// option adds (tau = rho) points for each rho below 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    tau_values: Vec<f64>,
    rho_values: Vec<f64>,
    include_diagonal: bool,
}

impl GridSpec {
    pub fn new(
        mut tau_values: Vec<f64>,
        mut rho_values: Vec<f64>,
        include_diagonal: bool,
    ) -> Result<Self> {
        if tau_values.is_empty() || rho_values.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &t in &tau_values {
            if !t.is_finite() || t >= 1.0 {
                return Err(Error::TauOutOfRange(t));
            }
        }
        for &r in &rho_values {
            if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                return Err(Error::RhoOutOfRange(r));
            }
        }
        tau_values.sort_by(f64::total_cmp);
        tau_values.dedup();
        rho_values.sort_by(f64::total_cmp);
        rho_values.dedup();
        Ok(Self {
            tau_values,
            rho_values,
            include_diagonal,
        })
    }

    /// The default grid: tau from -2.0 to 0.9 and rho from 0 to 1, both in
    /// steps of 0.1 (values built from integer ratios so the diagonal points
    /// coincide exactly with grid points).
    pub fn default_grid() -> Self {
        let tau_values: Vec<f64> = (-20..=9).map(|i| i as f64 / 10.0).collect();
        let rho_values: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        Self::new(tau_values, rho_values, true).expect("default grid is valid")
    }

    pub fn tau_values(&self) -> &[f64] {
        &self.tau_values
    }

    pub fn rho_values(&self) -> &[f64] {
        &self.rho_values
    }

    /// All grid points, sorted by (tau, rho), without duplicates.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.tau_values.len() * self.rho_values.len() + 11);
        for &t in &self.tau_values {
            for &r in &self.rho_values {
                pts.push((t, r));
            }
        }
        if self.include_diagonal {
            for &r in &self.rho_values {
                if r < 1.0 {
                    pts.push((r, r));
                }
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        pts
    }


    pub fn include_diagonal(&self) -> bool {
        self.include_diagonal
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCell {
    pub tau: f64,
    pub rho: f64,
    /// Mean of `fold_mses`; +inf when the cell's fit failed.
    pub cv_mse: f64,
    pub fold_mses: Vec<f64>,
}

/// Full CV sweep result. `fold_indices[i]` is the fold holding row i; the
/// assignment is shared by every cell (paired comparisons).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResultTable {
    pub entries: Vec<CvCell>,
    pub k: usize,
    pub seed: u64,
    pub fold_indices: Vec<usize>,
}

struct FoldData {
    train: Dataset,
    source_train: Array1<f64>,
    val_x: Array2<f64>,
    val_y: Array1<f64>,
    source_val: Array1<f64>,
}

fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..n).collect();
    let mut rng = derive_rng(seed, SeedStream::Folds, 0);
    rows.shuffle(&mut rng);
    // First n % k folds get the extra row.
    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0usize; n];
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &r in &rows[pos..pos + size] {
            fold_of[r] = f;
        }
        pos += size;
    }
    fold_of
}

/// Evaluate every grid point by k-fold CV of the full transfer pipeline
/// (transform, fit, blend) with a shared seeded fold split. A cell whose fit
/// fails records +inf rather than aborting the sweep.
pub fn cross_validate(
    dataset: &Dataset,
    source: &dyn SourcePredictor,
    grid: &GridSpec,
    learner: &LearnerSpec,
    k: usize,
    seed: u64,
) -> Result<CvResultTable> {
    let n = dataset.n();
    if k < 2 || k > n {
        return Err(Error::InvalidParams(format!(
            "k must lie in 2..=n ({n}), got {k}"
        )));
    }
    let source_all = source.predict_batch(dataset.features());
    if source_all.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("source predictions"));
    }

    let fold_indices = fold_assignment(n, k, seed);
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let train_rows: Vec<usize> = (0..n).filter(|&i| fold_indices[i] != f).collect();
        let val_rows: Vec<usize> = (0..n).filter(|&i| fold_indices[i] == f).collect();
        let train = dataset.subset(&train_rows)?;
        let val = dataset.subset(&val_rows)?;
        folds.push(FoldData {
            train,
            source_train: Array1::from_iter(train_rows.iter().map(|&i| source_all[i])),
            val_x: val.features().to_owned(),
            val_y: val.targets().to_owned(),
            source_val: Array1::from_iter(val_rows.iter().map(|&i| source_all[i])),
        });
    }

    // Points sharing a tau value share the fitted model (only the blend
    // differs), so fit once per (tau, fold). Points are sorted by tau, so
    // groups are contiguous runs.
    let points = grid.points();
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (idx, &(tau, _)) in points.iter().enumerate() {
        match groups.last_mut() {
            Some((t, v)) if *t == tau => v.push(idx),
            _ => groups.push((tau, vec![idx])),
        }
    }

    let per_group: Vec<Vec<(usize, Vec<f64>)>> = map_indexed(groups.len(), |gi| {
        let (tau, idxs) = &groups[gi];
        let mut fold_mses: Vec<Vec<f64>> = vec![Vec::with_capacity(k); idxs.len()];
        for fd in &folds {
            let preds = (|| -> Result<Array1<f64>> {
                let z = transform_targets(&fd.train, fd.source_train.view(), *tau)?;
                let model = fit(learner, fd.train.features(), z.view())?;
                model.predict_batch(fd.val_x.view())
            })();
            match preds {
                Ok(preds) => {
                    for (slot, &pi) in fold_mses.iter_mut().zip(idxs.iter()) {
                        let rho = points[pi].1;
                        let m = preds
                            .iter()
                            .zip(fd.source_val.iter())
                            .zip(fd.val_y.iter())
                            .map(|((&p, &s), &y)| {
                                let e = blend_predict(p, s, rho) - y;
                                e * e
                            })
                            .sum::<f64>()
                            / fd.val_y.len() as f64;
                        slot.push(m);
                    }
                }
                Err(_) => {
                    // A failed fit fails every cell sharing it.
                    for slot in fold_mses.iter_mut() {
                        *slot = vec![f64::INFINITY; k];
                    }
                    break;
                }
            }
        }
        idxs.iter().copied().zip(fold_mses).collect()
    });

    let mut entries: Vec<Option<CvCell>> = vec![None; points.len()];
    for (pi, fold_mses) in per_group.into_iter().flatten() {
        let (tau, rho) = points[pi];
        let cv_mse = fold_mses.iter().sum::<f64>() / k as f64;
        entries[pi] = Some(CvCell {
            tau,
            rho,
            cv_mse,
            fold_mses,
        });
    }
    Ok(CvResultTable {
        entries: entries.into_iter().map(|c| c.expect("every cell computed")).collect(),
        k,
        seed,
        fold_indices,
    })
}

/// Argmin of cv_mse with deterministic tie-breaking: prefer larger rho, then
/// smaller |tau - rho|, then smaller |tau|, then smaller tau.
pub fn select_hyperparams(table: &CvResultTable) -> Result<(TransferHyperparams, f64)> {
    let best = table
        .entries
        .iter()
        .min_by(|a, b| {
            a.cv_mse
                .total_cmp(&b.cv_mse)
                .then(b.rho.total_cmp(&a.rho))
                .then((a.tau - a.rho).abs().total_cmp(&(b.tau - b.rho).abs()))
                .then(a.tau.abs().total_cmp(&b.tau.abs()))
                .then(a.tau.total_cmp(&b.tau))
        })
        .ok_or(Error::EmptyTable)?;
    Ok((TransferHyperparams::new(best.tau, best.rho)?, best.cv_mse))
}

/// Qualitative region of hyperparameter space a (tau, rho) pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// rho = 1: predictions are the source unchanged.
    DirectSource,
    /// tau = rho = 0: ordinary fit, source unused.
    NoTransfer,
    /// tau < 0, rho = 0: fit pushed away from the source.
    SimilarityRegularization,
    /// tau = rho > 0: covariate-shift (density-ratio) correction.
    DensityRatio,
    /// Everything else.
    Hybrid,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::DirectSource => "DirectSource",
            Regime::NoTransfer => "NoTransfer",
            Regime::SimilarityRegularization => "SimilarityRegularization",
            Regime::DensityRatio => "DensityRatio",
            Regime::Hybrid => "Hybrid",
        };
        f.write_str(s)
    }
}

/// A classified hyperparameter pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub tau: f64,
    pub rho: f64,
}

pub const DEFAULT_REGIME_TOL: f64 = 1e-9;

/// Assign the regime, first match wins: DirectSource, NoTransfer,
/// SimilarityRegularization, DensityRatio, Hybrid.
pub fn classify_regime(hp: TransferHyperparams, tol: f64) -> RegimeLabel {
    let (tau, rho) = (hp.tau(), hp.rho());
    let regime = if rho >= 1.0 - tol {
        Regime::DirectSource
    } else if tau.abs() <= tol && rho <= tol {
        Regime::NoTransfer
    } else if tau < -tol && rho <= tol {
        Regime::SimilarityRegularization
    } else if (tau - rho).abs() <= tol && rho > tol {
        Regime::DensityRatio
    } else {
        Regime::Hybrid
    };
    RegimeLabel { regime, tau, rho }
}
