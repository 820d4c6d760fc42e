use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("invalid constraint set: {0}")]
    InvalidSet(String),

    #[error("oracle returned a non-finite value ({value}) {context}")]
    OracleFailure { value: f64, context: String },

    #[error("missing capability: {0}")]
    Capability(String),

    #[error("point outside the problem domain: {0}")]
    Domain(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{failed} of {total} trials failed")]
    TrialsFailed { failed: usize, total: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by bad user input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_)
                | Error::Invalid(_)
                | Error::InvalidSet(_)
                | Error::Capability(_)
                | Error::Domain(_)
                | Error::Config { .. }
                | Error::Parse { .. }
        )
    }
}
