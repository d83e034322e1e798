use thiserror::Error;

/// Errors produced by parsing, validation, and numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed input text (CSV schema, numbers, header).
    #[error("parse error: {0}")]
    Parse(String),

    /// An argument outside its mathematical domain or a violated precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Dimension mismatch between related inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix required to be symmetric positive definite is not.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// An estimator is undefined or numerically singular for the given data.
    #[error("estimation error: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
