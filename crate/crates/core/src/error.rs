use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate. The CLI maps each variant to a stable exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("trajectory diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("DL-GND outer loop {outer}: {source}")]
    OuterLoop {
        outer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("experiment aborted: trial {trial} diverged at iteration {iteration}")]
    TrialDiverged { trial: usize, iteration: usize },

    #[error("{context} {path:?}: {source}")]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config {path:?}: {message}")]
    Config { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Iteration index of the first non-finite or runaway evaluation, if this error carries one.
    pub fn diverged_iteration(&self) -> Option<usize> {
        match self {
            Error::Diverged { iteration, .. } | Error::TrialDiverged { iteration, .. } => {
                Some(*iteration)
            }
            Error::OuterLoop { source, .. } => source.diverged_iteration(),
            _ => None,
        }
    }

    pub fn is_divergence(&self) -> bool {
        self.diverged_iteration().is_some()
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
