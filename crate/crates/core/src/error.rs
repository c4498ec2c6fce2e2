use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("invalid demonstration: {0}")]
    InvalidDemonstration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("model fit failed: {0}")]
    Fit(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("chain format: {0}")]
    ChainFormat(String),

    #[error("singular KKT system")]
    SingularKkt,

    #[error("prediction collapse: predicted grip vector has near-zero length")]
    PredictionCollapse,

    #[error("controller fault: {0}")]
    ControllerFault(String),

    #[error("{path}: {source}")]
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
}
