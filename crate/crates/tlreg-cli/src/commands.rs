//! Subcommand arguments and implementations.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ndarray::{Array1, ArrayView2};
use serde_json::json;

use tlreg::analysis::{asymptotic_report, estimate_components, estimate_moments};
use tlreg::dataset::Dataset;
use tlreg::learners::{fit_ridge, FittedModel, ForestParams, LearnerSpec, RidgeParams};
use tlreg::selection::{
    classify_regime, cross_validate, select_hyperparams, GridSpec, DEFAULT_REGIME_TOL,
};
use tlreg::source::SourcePredictor;
use tlreg::synthdata::{
    landscape_experiment, sample_dataset, sample_eval_dataset, ExperimentConfig, TaskKind,
    TaskPair,
};
use tlreg::transfer::{blend_predict, fit_transfer, TransferHyperparams};

use crate::error::{CliError, Result};
use crate::external::ExternalCommandSource;
use crate::formats::{
    parse_dataset_csv, render_cv_csv, render_dataset_csv, render_json_pretty,
    render_landscape_csv, render_predictions_csv, render_report_csv, ParsedDataset,
};
use crate::model_file::{parse_model_file, CvSummary, ModelFile, Provenance, TransferMeta};

// ---------------------------------------------------------------------------
// Shared flag groups

#[derive(Args, Debug)]
pub struct SourceArgs {
    /// Saved model file used as the frozen source (must have rho = 0)
    #[arg(long, value_name = "FILE")]
    pub source_model: Option<PathBuf>,
    /// External command serving the source: feature CSV on stdin, one
    /// prediction per line on stdout (whitespace-split into argv)
    #[arg(long, value_name = "CMD", conflicts_with = "source_model")]
    pub source_cmd: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LearnerKind {
    Ridge,
    Forest,
}

#[derive(Args, Debug)]
pub struct LearnerArgs {
    /// Base learner trained on the transformed targets
    #[arg(long, value_enum, default_value_t = LearnerKind::Ridge)]
    pub learner: LearnerKind,
    /// Ridge l2 penalty
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    /// Trees in the forest
    #[arg(long, default_value_t = 200)]
    pub n_tree: usize,
    /// Features tried per split (default: p / 3)
    #[arg(long, value_name = "M")]
    pub m_try: Option<usize>,
    /// Minimum rows per forest leaf
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
}

impl LearnerArgs {
    fn to_spec(&self, seed: u64) -> LearnerSpec {
        match self.learner {
            LearnerKind::Ridge => LearnerSpec::Ridge(RidgeParams {
                lambda: self.lambda,
                center: false,
            }),
            LearnerKind::Forest => LearnerSpec::Forest(ForestParams {
                n_tree: self.n_tree,
                m_try: self.m_try,
                min_leaf: self.min_leaf,
                bootstrap: true,
                seed,
            }),
        }
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Tau grid: comma list (-0.5,0,0.3) or range start:stop:step
    #[arg(long, value_name = "VALUES", allow_hyphen_values = true)]
    pub grid_tau: Option<String>,
    /// Rho grid: comma list (0,0.5,1) or range start:stop:step
    #[arg(long, value_name = "VALUES")]
    pub grid_rho: Option<String>,
}

fn parse_axis(text: &str, flag: &str) -> Result<Vec<f64>> {
    let usage = |m: String| CliError::Usage(format!("{flag}: {m}"));
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("{s:?} is not a number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(usage("ranges are start:stop:step".to_string()));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !step.is_finite() {
            return Err(usage(format!("step must be positive, got {step}")));
        }
        if stop < start {
            return Err(usage(format!("range is empty: {start} > {stop}")));
        }
        // Snap to the decimal precision the user typed so 0:1:0.1 yields
        // 0.1 rather than an accumulated 0.10000000000000003.
        let decimals = parts
            .iter()
            .map(|p| match p.split_once('.') {
                Some((_, frac)) if !p.contains(['e', 'E']) => frac.trim().len() as i32,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let snap = 10f64.powi(decimals.min(12));
        let plain = !text.contains(['e', 'E']);
        let n_steps = ((stop - start) / step + 1e-9).floor() as usize;
        let values = (0..=n_steps)
            .map(|i| {
                let v = start + i as f64 * step;
                if plain {
                    (v * snap).round() / snap
                } else {
                    v
                }
            })
            .collect();
        Ok(values)
    } else {
        text.split(',').map(num).collect()
    }
}

fn grid_from_args(grid: &GridArgs) -> Result<GridSpec> {
    let default = GridSpec::default_grid();
    let taus = match &grid.grid_tau {
        Some(text) => parse_axis(text, "--grid-tau")?,
        None => default.tau_values().to_vec(),
    };
    let rhos = match &grid.grid_rho {
        Some(text) => parse_axis(text, "--grid-rho")?,
        None => default.rho_values().to_vec(),
    };
    GridSpec::new(taus, rhos, true).map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Linear,
    Relu,
}

impl From<KindArg> for TaskKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Linear => TaskKind::Linear,
            KindArg::Relu => TaskKind::Relu,
        }
    }
}

// ---------------------------------------------------------------------------
// IO helpers

fn read_input(path_or_dash: &str) -> Result<String> {
    if path_or_dash == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin().lock(), &mut buf)
            .map_err(|e| CliError::Data(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        read_file(Path::new(path_or_dash))
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_output(path_or_dash: &str, content: &str) -> Result<()> {
    if path_or_dash == "-" {
        std::io::Write::write_all(&mut std::io::stdout().lock(), content.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}")))
    } else {
        write_file(Path::new(path_or_dash), content)
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Source handling

enum SourceHandle {
    Model(Box<FittedModel>),
    External(ExternalCommandSource),
}

impl SourceHandle {
    fn from_args(args: &SourceArgs) -> Result<Option<Self>> {
        match (&args.source_model, &args.source_cmd) {
            (Some(path), None) => {
                let file = parse_model_file(&read_file(path)?, &path.display().to_string())?;
                if file.transfer.rho != 0.0 {
                    return Err(CliError::Data(format!(
                        "{}: blends with rho = {}; only a pure model (rho = 0) can serve as a source",
                        path.display(),
                        file.transfer.rho
                    )));
                }
                Ok(Some(SourceHandle::Model(Box::new(file.learner))))
            }
            (None, Some(descriptor)) => Ok(Some(SourceHandle::External(
                ExternalCommandSource::new(descriptor)?,
            ))),
            (None, None) => Ok(None),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }

    fn require(args: &SourceArgs, command: &str) -> Result<Self> {
        Self::from_args(args)?.ok_or_else(|| {
            CliError::Usage(format!("{command} needs --source-model or --source-cmd"))
        })
    }

    fn predictor(&self) -> &dyn SourcePredictor {
        match self {
            SourceHandle::Model(m) => m.as_ref(),
            SourceHandle::External(e) => e,
        }
    }

    fn check_width(&self, p: usize) -> Result<()> {
        if let SourceHandle::Model(m) = self {
            if m.n_features() != p {
                return Err(CliError::Data(format!(
                    "source model expects {} features, data has {p}",
                    m.n_features()
                )));
            }
        }
        Ok(())
    }

    /// Re-categorize a library failure: a recorded child diagnostic wins over
    /// the generic non-finite-source error it caused.
    fn lift<T>(&self, res: tlreg::Result<T>) -> Result<T> {
        res.map_err(|e| match self {
            SourceHandle::External(ext) => match ext.failure() {
                Some(msg) => CliError::Child(msg),
                None => CliError::Data(e.to_string()),
            },
            SourceHandle::Model(_) => CliError::Data(e.to_string()),
        })
    }
}

fn load_training_data(path: &Path) -> Result<Dataset> {
    let parsed = parse_dataset_csv(&read_file(path)?, &path.display().to_string())?;
    let targets = parsed.targets.ok_or_else(|| {
        CliError::Data(format!("{}: training data needs a y column", path.display()))
    })?;
    Dataset::new(parsed.features, targets).map_err(|e| CliError::Data(e.to_string()))
}

// ---------------------------------------------------------------------------
// fit

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Training data CSV (header f1..fp,y)
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Fix tau instead of cross-validating (requires --rho)
    #[arg(long, requires = "rho", allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Fix rho instead of cross-validating (requires --tau)
    #[arg(long, requires = "tau")]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output model file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// CV table CSV (default: <out>.cv.csv when selection runs)
    #[arg(long, value_name = "FILE")]
    pub cv_out: Option<PathBuf>,
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let dataset = load_training_data(&args.data)?;
    let source = SourceHandle::require(&args.source, "fit")?;
    source.check_width(dataset.p())?;
    let learner = args.learner.to_spec(args.seed);

    let (hp, cv_info) = match (args.tau, args.rho) {
        (Some(tau), Some(rho)) => {
            let hp = TransferHyperparams::new(tau, rho)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            (hp, None)
        }
        _ => {
            let grid = grid_from_args(&args.grid)?;
            let table = source.lift(cross_validate(
                &dataset,
                source.predictor(),
                &grid,
                &learner,
                args.k,
                args.seed,
            ))?;
            let (best, cv_mse) = select_hyperparams(&table)?;
            let cv_path = args
                .cv_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("cv.csv"));
            write_file(&cv_path, &render_cv_csv(&table))?;
            (best, Some((grid, table.k, cv_mse)))
        }
    };

    let fitted = source.lift(fit_transfer(&dataset, source.predictor(), hp, &learner))?;
    let regime = classify_regime(hp, DEFAULT_REGIME_TOL).regime.to_string();
    let (grid, cv) = match cv_info {
        Some((grid, k, cv_mse)) => (Some(grid), Some(CvSummary { k, cv_mse })),
        None => (None, None),
    };
    let file = ModelFile {
        format_version: crate::model_file::FORMAT_VERSION,
        learner: fitted.into_model(),
        transfer: TransferMeta {
            tau: hp.tau(),
            rho: hp.rho(),
            regime,
        },
        provenance: Provenance {
            seed: args.seed,
            grid,
            cv,
        },
    };
    write_file(&args.out, &render_json_pretty(&file, "model")?)
}

// ---------------------------------------------------------------------------
// predict

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Saved model file
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Feature CSV (header f1..fp); '-' reads stdin, a y column is ignored
    #[arg(long, value_name = "FILE")]
    pub data: String,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Output path; '-' writes stdout
    #[arg(long, default_value = "-", value_name = "FILE")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

fn source_predictions(
    source: &SourceHandle,
    features: ArrayView2<'_, f64>,
) -> Result<Array1<f64>> {
    let preds = source.predictor().predict_batch(features);
    if let SourceHandle::External(ext) = source {
        if let Some(msg) = ext.failure() {
            return Err(CliError::Child(msg));
        }
    }
    if preds.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Data("source predictions are not finite".to_string()));
    }
    Ok(preds)
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let file = parse_model_file(&read_file(&args.model)?, &args.model.display().to_string())?;
    let ParsedDataset { features, .. } = parse_dataset_csv(&read_input(&args.data)?, &args.data)?;
    if features.ncols() != file.learner.n_features() {
        return Err(CliError::Data(format!(
            "model expects {} features, data has {}",
            file.learner.n_features(),
            features.ncols()
        )));
    }

    let preds = if file.transfer.rho > 0.0 {
        let source = SourceHandle::from_args(&args.source)?.ok_or_else(|| {
            CliError::Usage(format!(
                "model blends with rho = {}; provide --source-model or --source-cmd",
                file.transfer.rho
            ))
        })?;
        source.check_width(features.ncols())?;
        let source_preds = source_predictions(&source, features.view())?;
        let model_preds = file.learner.predict_batch(features.view())?;
        Array1::from_iter(
            model_preds
                .iter()
                .zip(source_preds.iter())
                .map(|(&m, &s)| blend_predict(m, s, file.transfer.rho)),
        )
    } else {
        file.learner.predict_batch(features.view())?
    };

    let rendered = match args.format {
        OutputFormat::Csv => render_predictions_csv(&preds),
        OutputFormat::Json => render_json_pretty(&preds.to_vec(), "predictions")?,
    };
    write_output(&args.out, &rendered)
}

// ---------------------------------------------------------------------------
// select

#[derive(Args, Debug)]
pub struct SelectArgs {
    /// Training data CSV (header f1..fp,y)
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Selection JSON output; '-' writes stdout
    #[arg(long, default_value = "-", value_name = "FILE")]
    pub out: String,
    /// Full CV table CSV
    #[arg(long, value_name = "FILE")]
    pub cv_out: Option<PathBuf>,
}

pub fn select(args: &SelectArgs) -> Result<()> {
    let dataset = load_training_data(&args.data)?;
    let source = SourceHandle::require(&args.source, "select")?;
    source.check_width(dataset.p())?;
    let grid = grid_from_args(&args.grid)?;
    let learner = args.learner.to_spec(args.seed);
    let table = source.lift(cross_validate(
        &dataset,
        source.predictor(),
        &grid,
        &learner,
        args.k,
        args.seed,
    ))?;
    let (best, cv_mse) = select_hyperparams(&table)?;
    if let Some(path) = &args.cv_out {
        write_file(path, &render_cv_csv(&table))?;
    }
    let label = classify_regime(best, DEFAULT_REGIME_TOL);
    let doc = json!({
        "tau": best.tau(),
        "rho": best.rho(),
        "regime": label.regime.to_string(),
        "cv_mse": cv_mse,
    });
    write_output(&args.out, &render_json_pretty(&doc, "selection")?)
}

// ---------------------------------------------------------------------------
// landscape

#[derive(Args, Debug)]
pub struct LandscapeArgs {
    /// Synthetic task family
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Feature dimension (relu pairs are fixed at 300)
    #[arg(long, default_value_t = 300)]
    pub p: usize,
    /// Source-target mixing weight in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Observation noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma_eps: f64,
    #[arg(long, default_value_t = 50)]
    pub n_train: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_eval: usize,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; '-' writes stdout
    #[arg(long, value_name = "FILE")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

fn check_synth_params(kind: KindArg, p: usize, alpha: f64, sigma_eps: f64) -> Result<()> {
    let usage = |m: String| Err(CliError::Usage(m));
    if kind == KindArg::Relu && p != 300 {
        return usage(format!("relu tasks have a fixed input dimension of 300, got --p {p}"));
    }
    if p == 0 {
        return usage("--p must be at least 1".to_string());
    }
    if !(0.0..=1.0).contains(&alpha) {
        return usage(format!("--alpha must lie in [0, 1], got {alpha}"));
    }
    if !sigma_eps.is_finite() || sigma_eps < 0.0 {
        return usage(format!("--sigma-eps must be finite and >= 0, got {sigma_eps}"));
    }
    Ok(())
}

pub fn landscape(args: &LandscapeArgs) -> Result<()> {
    check_synth_params(args.kind, args.p, args.alpha, args.sigma_eps)?;
    let config = ExperimentConfig {
        kind: args.kind.into(),
        p: args.p,
        alpha: args.alpha,
        sigma_eps: args.sigma_eps,
        n_train: args.n_train,
        n_eval: args.n_eval,
        learner: args.learner.to_spec(args.seed),
        grid: grid_from_args(&args.grid)?,
        seed: args.seed,
    };
    let rows = landscape_experiment(&config)?;
    let rendered = match args.format {
        OutputFormat::Csv => render_landscape_csv(&rows),
        OutputFormat::Json => render_json_pretty(&rows, "landscape")?,
    };
    write_output(&args.out, &rendered)
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Synthetic task family
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Feature dimension (relu pairs are fixed at 300)
    #[arg(long, default_value_t = 300)]
    pub p: usize,
    /// Source-target mixing weight in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Observation noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma_eps: f64,
    /// Rows to draw
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV output; '-' writes stdout
    #[arg(long, value_name = "FILE")]
    pub out: String,
    /// Also save the generating task pair as JSON
    #[arg(long, value_name = "FILE")]
    pub tasks_out: Option<PathBuf>,
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    check_synth_params(args.kind, args.p, args.alpha, args.sigma_eps)?;
    let pair = TaskPair::generate(args.kind.into(), args.p, args.alpha, args.seed)?;
    let target = pair.target();
    let data = sample_dataset(target.as_ref(), args.p, args.n, args.sigma_eps, args.seed)?;
    write_output(
        &args.out,
        &render_dataset_csv(data.features(), Some(data.targets())),
    )?;
    if let Some(path) = &args.tasks_out {
        let doc = json!({
            "format_version": 1,
            "alpha": args.alpha,
            "seed": args.seed,
            "task_pair": pair,
        });
        write_file(path, &render_json_pretty(&doc, "task pair")?)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Synthetic task family
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Feature dimension (relu pairs are fixed at 300)
    #[arg(long, default_value_t = 300)]
    pub p: usize,
    /// Source-target mixing weight in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Observation noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma_eps: f64,
    #[arg(long, default_value_t = 50)]
    pub n_train: usize,
    /// Evaluation points for the component estimates
    #[arg(long, default_value_t = 500)]
    pub n_eval: usize,
    /// Ridge penalty of the smoother behind the component estimates
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stationary-blend probes, comma separated
    #[arg(long, default_value = "0.2,0.5,0.8", allow_hyphen_values = true)]
    pub taus: String,
    /// Discrepancy scaling factors, comma separated and increasing
    #[arg(long, default_value = "1,10,100,1000,10000,100000,1000000")]
    pub scales: String,
    /// Moments JSON output; '-' writes stdout
    #[arg(long, value_name = "FILE")]
    pub out: String,
    /// Scaling report CSV (default: <out>.report.csv)
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    check_synth_params(args.kind, args.p, args.alpha, args.sigma_eps)?;
    let taus = parse_axis(&args.taus, "--taus")?;
    let scales = parse_axis(&args.scales, "--scales")?;
    let report_path = match (&args.report_out, args.out.as_str()) {
        (Some(path), _) => path.clone(),
        (None, "-") => {
            return Err(CliError::Usage(
                "--report-out is required when --out is stdout".to_string(),
            ))
        }
        (None, out) => Path::new(out).with_extension("report.csv"),
    };

    let pair = TaskPair::generate(args.kind.into(), args.p, args.alpha, args.seed)?;
    let target = pair.target();
    let source = pair.source();
    let train = sample_dataset(target.as_ref(), args.p, args.n_train, args.sigma_eps, args.seed)?;
    let eval = sample_eval_dataset(target.as_ref(), args.p, args.n_eval, 0.0, args.seed)?;
    let smoother = fit_ridge(
        train.features(),
        train.targets(),
        &RidgeParams {
            lambda: args.lambda,
            center: false,
        },
    )?;
    let sigma2 = args.sigma_eps * args.sigma_eps;
    let components = estimate_components(
        eval.features(),
        target.as_ref(),
        source.as_ref(),
        &smoother,
        train.features(),
        sigma2,
    )?;
    let moments = estimate_moments(&components, sigma2)?;
    let report = asymptotic_report(&moments, &scales, &taus)?;

    write_file(&report_path, &render_report_csv(&report))?;
    write_output(&args.out, &render_json_pretty(&moments, "moments")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_handles_lists_and_ranges() {
        assert_eq!(parse_axis("0,0.5,1", "--grid-rho").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(
            parse_axis("-0.2:0.2:0.1", "--grid-tau").unwrap(),
            vec![-0.2, -0.1, 0.0, 0.1, 0.2]
        );
        let long = parse_axis("0:1:0.1", "--grid-rho").unwrap();
        assert_eq!(long.len(), 11);
        assert_eq!(*long.last().unwrap(), 1.0);
    }

    #[test]
    fn axis_parsing_rejects_malformed_input() {
        assert!(parse_axis("0:1", "--grid-tau").is_err());
        assert!(parse_axis("0:1:-0.5", "--grid-tau").is_err());
        assert!(parse_axis("1:0:0.5", "--grid-tau").is_err());
        assert!(parse_axis("a,b", "--grid-tau").is_err());
    }

    #[test]
    fn default_grid_is_used_when_flags_are_absent() {
        let grid = grid_from_args(&GridArgs {
            grid_tau: None,
            grid_rho: None,
        })
        .unwrap();
        let default = GridSpec::default_grid();
        assert_eq!(grid.points(), default.points());
    }

    #[test]
    fn relu_dimension_mismatch_is_a_usage_error() {
        let err = check_synth_params(KindArg::Relu, 40, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }
}
