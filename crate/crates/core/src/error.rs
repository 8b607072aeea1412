use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical integrity check failed: {0}")]
    Numerical(String),

    #[error("count record is empty")]
    EmptyRecord,

    #[error("visibility is undefined: {0}")]
    UndefinedVisibility(String),

    #[error("incomplete term set: {0}")]
    IncompleteTerms(String),
}
