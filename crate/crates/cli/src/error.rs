use billiard_core::BilliardError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Core(#[from] BilliardError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Core(BilliardError::InvalidInput(_)) => 2,
            CliError::Core(BilliardError::Domain(_)) => 4,
            CliError::Core(BilliardError::Integrity(_)) => 5,
            CliError::Io(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Parse(String::new()).exit_code(), 2);
        assert_eq!(CliError::Validation(String::new()).exit_code(), 3);
        assert_eq!(CliError::from(BilliardError::InvalidInput(String::new())).exit_code(), 2);
        assert_eq!(CliError::from(BilliardError::Domain(String::new())).exit_code(), 4);
        assert_eq!(CliError::from(BilliardError::Integrity(String::new())).exit_code(), 5);
        assert_eq!(CliError::Io(String::new()).exit_code(), 1);
    }
}
