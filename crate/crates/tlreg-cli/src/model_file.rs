//! Model persistence: a single self-describing JSON document. The version
//! gate rejects files from other format generations instead of guessing.

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use tlreg::learners::FittedModel;
use tlreg::selection::GridSpec;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferMeta {
    pub tau: f64,
    pub rho: f64,
    pub regime: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    pub cv_mse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv: Option<CvSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u64,
    pub learner: FittedModel,
    pub transfer: TransferMeta,
    pub provenance: Provenance,
}

pub fn parse_model_file(content: &str, label: &str) -> Result<ModelFile> {
    let value: serde_json::Value = serde_json::from_str(content)
        .map_err(|e| CliError::Data(format!("{label}: not valid JSON: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| CliError::Data(format!("{label}: missing format_version")))?;
    if version != FORMAT_VERSION {
        return Err(CliError::Data(format!(
            "{label}: unsupported format_version {version} (this build reads {FORMAT_VERSION})"
        )));
    }
    serde_json::from_value(value).map_err(|e| CliError::Data(format!("{label}: {e}")))
}
