use thiserror::Error;

use crate::solvers::TraceRow;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// The operation is well formed but not applicable to the given inputs,
    /// e.g. DSGD on weights that are not doubly stochastic.
    #[error("incompatible input: {0}")]
    Incompatible(String),

    #[error("graph generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("diverged at iteration {iteration}{}: {reason}", node.map(|i| format!(" on node {i}")).unwrap_or_default())]
    Diverged {
        iteration: usize,
        node: Option<usize>,
        reason: String,
        /// Trace rows recorded before the failure.
        partial_trace: Vec<TraceRow>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad user input or configuration rather than
    /// a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidInput(_)
                | Error::InvalidConfiguration(_)
                | Error::Parse { .. }
        )
    }
}
