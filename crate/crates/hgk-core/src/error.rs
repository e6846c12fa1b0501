use std::path::PathBuf;

/// Errors produced by graph construction, dataset ingestion, kernel
/// computation, and the evaluation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has no node labels")]
    MissingLabels,

    #[error("graph has no node attributes")]
    MissingAttributes,

    #[error("missing dataset file: {0}")]
    MissingFile(PathBuf),

    #[error("format error in {file} line {line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },

    #[error("oracle cap exceeded: {0}")]
    CapExceeded(String),

    #[error("training error: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
