use thiserror::Error;

#[derive(Debug, Error)]
pub enum CritError {
    #[error("unknown catalog key: {0}")]
    UnknownKey(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("operation not supported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, CritError>;
