//! Shared error type for all numerical modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    /// Malformed input: wrong shape, non-symmetric matrix, bad parameter range.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input outside an operation's mathematical domain (e.g. non-SPD matrix).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// A computation left its numerical tolerance envelope.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    pub fn validation(msg: impl Into<String>) -> Self {
        GeomError::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        GeomError::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        GeomError::Numerical(msg.into())
    }

    pub fn dims(expected: impl Into<String>, got: impl Into<String>) -> Self {
        GeomError::DimensionMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }
}
