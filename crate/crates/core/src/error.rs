use thiserror::Error;

pub type Result<T> = std::result::Result<T, ViError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vectors belong to different spaces")]
    SpaceMismatch,
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid contraction: {0}")]
    InvalidContraction(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid step policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("line search exceeded {trials} trials")]
    LineSearchFailed { trials: u32 },
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
}
