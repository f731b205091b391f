use thiserror::Error;

/// Errors produced by the model, solvers and closed-form evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The constrained linear solve was singular or its residual exceeded tolerance.
    #[error("numerical failure: {reason} (condition estimate {condition:.3e})")]
    NumericalFailure { reason: String, condition: f64 },

    /// The Liouvillian kernel has more than one independent stationary state.
    #[error("stationary state is not unique: kernel dimension {kernel_dim}")]
    Degenerate { kernel_dim: usize },

    #[error("no dark state: collective mode {mode} is driven (|η̃| = {drive:.3e}) but uncoupled")]
    NoDarkState { mode: usize, drive: f64 },

    #[error("drive at or above threshold: 4η/(Ng) = {ratio:.6} >= 1")]
    Threshold { ratio: f64 },

    #[error("resource budget exceeded: {what} needs {required}, limit is {limit}")]
    Budget {
        what: &'static str,
        required: usize,
        limit: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
