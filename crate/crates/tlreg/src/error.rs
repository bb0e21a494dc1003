use thiserror::Error;

/// Errors produced by the fitting, selection, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// The transform divides by 1 - tau, so tau must stay strictly below 1.
    #[error("tau must be finite and strictly below 1, got {0}")]
    TauOutOfRange(f64),

    #[error("rho must lie in [0, 1], got {0}")]
    RhoOutOfRange(f64),

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("empty result table")]
    EmptyTable,

    #[error("empty input")]
    EmptyInput,

    /// A closed-form expression's denominator collapsed; the optimum is not
    /// identified by the formula at this point.
    #[error("degenerate denominator")]
    DegenerateDenominator,
}

pub type Result<T> = std::result::Result<T, Error>;
