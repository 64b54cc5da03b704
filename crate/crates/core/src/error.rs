use thiserror::Error;

/// Errors raised by the library.
///
/// Each variant maps to one CLI exit class.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BilliardError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrity error: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, BilliardError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(BilliardError::InvalidInput(msg.into()))
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(BilliardError::Domain(msg.into()))
}

pub(crate) fn integrity<T>(msg: impl Into<String>) -> Result<T> {
    Err(BilliardError::Integrity(msg.into()))
}
