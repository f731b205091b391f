use darkcav_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    /// The run finished and wrote its output, but some result did not meet its check.
    #[error("numerical check failed: {0}")]
    Check(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Core(e) => match e {
                CoreError::Dimension(_) | CoreError::InvalidParameter(_) | CoreError::Threshold { .. } => {
                    exit::VALIDATION
                }
                CoreError::NumericalFailure { .. } | CoreError::Degenerate { .. } | CoreError::NoDarkState { .. } => {
                    exit::NUMERICAL
                }
                CoreError::Budget { .. } => exit::RESOURCE,
            },
            CliError::Check(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::RESOURCE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Validation("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(CoreError::InvalidParameter("x".into())).exit_code(), 1);
        let numerical = CoreError::NumericalFailure {
            reason: "x".into(),
            condition: 1.0,
        };
        assert_eq!(CliError::from(numerical).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::NoDarkState { mode: 1, drive: 0.1 }).exit_code(), 2);
        let budget = CoreError::Budget {
            what: "x",
            required: 2,
            limit: 1,
        };
        assert_eq!(CliError::from(budget).exit_code(), 3);
    }
}
