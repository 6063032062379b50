use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent dimensions or out-of-range parameters.
    #[error("invalid input: {0}")]
    Input(String),

    /// The predictive covariance stopped being positive definite.
    #[error("filter divergence at t={t}: {reason}")]
    FilterDivergence { t: usize, reason: String },

    #[error("singular predictive covariance at t={t} (determinant {det:e})")]
    SingularPredictive { t: usize, det: f64 },

    #[error("chain aborted at iteration {iteration}: {source}")]
    ChainAborted {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite draw for {parameter} at iteration {iteration}")]
    NonFinite { iteration: usize, parameter: String },

    #[error("{path}:{row}:{column}: {message}")]
    Data {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end:
    /// 1 usage/config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Config(_) => 1,
            Error::Data { .. } | Error::Io { .. } | Error::Csv(_) => 2,
            Error::FilterDivergence { .. }
            | Error::SingularPredictive { .. }
            | Error::ChainAborted { .. }
            | Error::NonFinite { .. } => 3,
        }
    }
}
