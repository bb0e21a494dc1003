use thiserror::Error;

/// Errors grouped by exit category: flag misuse (1), data or model problems
/// (2), and external source-command failures (3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Child(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Child(_) => 3,
        }
    }
}

impl From<tlreg::Error> for CliError {
    fn from(e: tlreg::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
