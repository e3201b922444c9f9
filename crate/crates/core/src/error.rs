use thiserror::Error;

/// Errors surfaced by waveform, channel, and estimator operations.
#[derive(Debug, Error)]
pub enum AfdmError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("division by a zero symbol at (row {row}, col {col})")]
    ZeroSymbol { row: usize, col: usize },

    #[error("candidate rejected: {0}")]
    CandidateRejected(String),

    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, AfdmError>;
