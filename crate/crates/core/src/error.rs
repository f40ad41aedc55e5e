use std::path::PathBuf;

use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Error, Debug)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("ingestion error at row {row}, column `{column}`: {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },
    #[error("ingestion error: {0}")]
    Ingest(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("degenerate vector: {0}")]
    DegenerateVector(String),
    #[error("intractable: {0}")]
    Tractability(String),
    #[error("recipe error: {0}")]
    Recipe(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
