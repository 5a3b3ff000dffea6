use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("objective has no minimum: {0}")]
    NoMinimum(String),

    #[error("degenerate Hessian: {0}")]
    DegenerateHessian(String),

    #[error("penalty Hessian is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    ConvexityViolation { min_eigenvalue: f64 },

    #[error("solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Vec<f64>,
    },

    #[error("tuning failed at every grid point ({} failures)", failures.len())]
    TuningFailure { failures: Vec<(f64, String)> },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::Numerical(_) => "numerical",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Configuration(_) => "configuration",
            Error::NoMinimum(_) => "no_minimum",
            Error::DegenerateHessian(_) => "degenerate_hessian",
            Error::ConvexityViolation { .. } => "convexity_violation",
            Error::NonConvergence { .. } => "non_convergence",
            Error::TuningFailure { .. } => "tuning_failure",
            Error::Malformed(_) => "malformed_input",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
