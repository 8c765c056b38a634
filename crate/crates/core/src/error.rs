use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the model, the solvers and the simulator.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    /// A parameter violates its precondition. `field` is a dotted path when known.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("singular model: {message}")]
    SingularModel { message: String },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("model inconsistency: {message}")]
    ModelInconsistency { message: String },

    /// Sensing load exceeds the service capacity of the contention process.
    #[error("unstable sensing load: lambda = {lambda:e} /us exceeds service rate {service_rate:e} /us")]
    Unstable { lambda: f64, service_rate: f64 },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error on `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("sweep error: {message}")]
    Sweep { message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn sweep(message: impl Into<String>) -> Self {
        Error::Sweep {
            message: message.into(),
        }
    }

    /// Broad failure class: validation, numerical or IO.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter { .. } | Error::Parse { .. } | Error::Sweep { .. } => ErrorCategory::Validation,
            Error::SingularModel { .. }
            | Error::ConvergenceFailure { .. }
            | Error::ModelInconsistency { .. }
            | Error::Unstable { .. } => ErrorCategory::Numerical,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Numerical,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
