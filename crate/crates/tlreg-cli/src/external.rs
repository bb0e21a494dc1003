//! Client for external source models: the command gets the feature matrix as
//! a dataset CSV (no target column) on stdin and must print one prediction
//! per line. One child process per matrix, invocations serialized.
//!
//! The predictor trait cannot carry errors, so a failed child yields NaN
//! predictions (which the library rejects as non-finite) and the diagnostic
//! is parked here for the command layer to turn into the child exit category.

use crate::error::{CliError, Result};
use crate::formats::render_dataset_csv;
use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use std::io::Write as _;
use std::process::{Command, Stdio};
use std::sync::Mutex;
use tlreg::source::SourcePredictor;

pub struct ExternalCommandSource {
    argv: Vec<String>,
    failure: Mutex<Option<String>>,
}

impl ExternalCommandSource {
    /// Split the descriptor on whitespace: first token is the program, the
    /// rest are arguments. Quoting is not interpreted; wrap complex commands
    /// in a script.
    pub fn new(descriptor: &str) -> Result<Self> {
        let argv: Vec<String> = descriptor.split_whitespace().map(str::to_owned).collect();
        if argv.is_empty() {
            return Err(CliError::Usage("--source-cmd is empty".to_string()));
        }
        Ok(Self {
            argv,
            failure: Mutex::new(None),
        })
    }

    /// The first failure recorded by any invocation.
    pub fn failure(&self) -> Option<String> {
        self.failure.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn invoke(&self, xs: ArrayView2<'_, f64>) -> std::result::Result<Array1<f64>, String> {
        let program = &self.argv[0];
        let mut child = Command::new(program)
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("source command {program:?} failed to start: {e}"))?;

        // Feed stdin from its own thread; the child may interleave reading
        // and writing, and both pipes have finite buffers.
        let input = render_dataset_csv(xs, None);
        let mut stdin = child.stdin.take().expect("stdin was piped");
        let feeder = std::thread::spawn(move || {
            let _ = stdin.write_all(input.as_bytes());
        });
        let output = child
            .wait_with_output()
            .map_err(|e| format!("source command {program:?} did not finish: {e}"));
        let _ = feeder.join();
        let output = output?;

        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            let detail = stderr.lines().last().unwrap_or("").trim();
            return Err(format!(
                "source command {program:?} exited with {}{}{}",
                output.status,
                if detail.is_empty() { "" } else { ": " },
                detail
            ));
        }

        let text = String::from_utf8_lossy(&output.stdout);
        let mut preds = Vec::with_capacity(xs.nrows());
        for (i, line) in text.lines().enumerate() {
            let v: f64 = line.trim().parse().map_err(|_| {
                format!(
                    "source command {program:?} protocol error: output line {} is not a number: {line:?}",
                    i + 1
                )
            })?;
            if !v.is_finite() {
                return Err(format!(
                    "source command {program:?} protocol error: output line {} is not finite: {line:?}",
                    i + 1
                ));
            }
            preds.push(v);
        }
        if preds.len() != xs.nrows() {
            return Err(format!(
                "source command {program:?} protocol error: {} predictions for {} rows",
                preds.len(),
                xs.nrows()
            ));
        }
        Ok(Array1::from_vec(preds))
    }

    fn record_failure(&self, message: String, n: usize) -> Array1<f64> {
        let mut slot = self.failure.lock().unwrap_or_else(|e| e.into_inner());
        if slot.is_none() {
            *slot = Some(message);
        }
        Array1::from_elem(n, f64::NAN)
    }
}

impl SourcePredictor for ExternalCommandSource {
    fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        let xs = x.insert_axis(Axis(0));
        self.predict_batch(xs)[0]
    }

    fn predict_batch(&self, xs: ArrayView2<'_, f64>) -> Array1<f64> {
        match self.invoke(xs) {
            Ok(v) => v,
            Err(message) => self.record_failure(message, xs.nrows()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn empty_descriptor_is_a_usage_error() {
        assert!(matches!(
            ExternalCommandSource::new("   "),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn missing_program_records_a_failure_and_returns_nan() {
        let src = ExternalCommandSource::new("/nonexistent/program-xyz").unwrap();
        let out = src.predict_batch(array![[1.0, 2.0]].view());
        assert!(out[0].is_nan());
        assert!(src.failure().unwrap().contains("failed to start"));
    }

    #[test]
    fn cat_like_child_fails_the_protocol() {
        // `head -c 0` swallows stdin and prints nothing: wrong line count.
        let src = ExternalCommandSource::new("head -c 0").unwrap();
        let out = src.predict_batch(array![[1.0], [2.0]].view());
        assert!(out.iter().all(|v| v.is_nan()));
        let msg = src.failure().unwrap();
        assert!(msg.contains("0 predictions for 2 rows"), "{msg}");
    }

    #[test]
    fn child_echoing_the_single_column_works() {
        // With one feature the CSV body is already one value per line.
        let src = ExternalCommandSource::new("tail -n +2").unwrap();
        let out = src.predict_batch(array![[1.5], [-2.0]].view());
        assert_eq!(out, array![1.5, -2.0]);
        assert!(src.failure().is_none());
    }
}
