//! Command-line front end for the transfer-regression library.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or model
//! problems, 3 when an external source command misbehaves.

pub mod commands;
pub mod error;
pub mod external;
pub mod formats;
pub mod model_file;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "tlreg",
    version,
    about = "Transfer-learning regression with a (tau, rho) hyperparameter family",
    long_about = "Fits a base learner on transfer-transformed targets and blends it with a \
frozen source model. tau shapes the training objective, rho the prediction blend; both are \
either fixed on the command line or selected by k-fold cross-validation over a grid."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Train a transfer model and write it as JSON
    Fit(commands::FitArgs),
    /// Apply a saved model to feature data
    Predict(commands::PredictArgs),
    /// Cross-validate the grid and report the chosen (tau, rho)
    Select(commands::SelectArgs),
    /// Grid-evaluate test error on a synthetic task pair
    Landscape(commands::LandscapeArgs),
    /// Draw a synthetic dataset from a generated task pair
    Synth(commands::SynthArgs),
    /// Estimate error moments and the large-discrepancy behavior of the
    /// optimal blend
    Analyze(commands::AnalyzeArgs),
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; only real parse
            // failures are usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            e.print().expect("writing clap output");
            return code;
        }
    };
    let result = match &cli.command {
        Cmd::Fit(args) => commands::fit(args),
        Cmd::Predict(args) => commands::predict(args),
        Cmd::Select(args) => commands::select(args),
        Cmd::Landscape(args) => commands::landscape(args),
        Cmd::Synth(args) => commands::synth(args),
        Cmd::Analyze(args) => commands::analyze(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
