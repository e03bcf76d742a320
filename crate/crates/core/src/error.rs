use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
