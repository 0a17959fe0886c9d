use std::path::PathBuf;

/// Errors produced by shape ingestion, curve computation and testing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("containment error: {0}")]
    Containment(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
