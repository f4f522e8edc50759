use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("truncation unsound: {0}")]
    TruncationUnsound(String),
    #[error("wrong homogeneity: expected degree {expected}, found {found}")]
    WrongHomogeneity { expected: i32, found: i32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invariance failure: {0}")]
    InvarianceFailure(String),
    #[error("decomposition failure: {0}")]
    Decomposition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unassigned symbol: {0}")]
    Unassigned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
