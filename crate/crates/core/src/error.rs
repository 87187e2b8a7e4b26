use std::path::PathBuf;

/// Errors produced by the coreset library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("more than two classes (found labels {0:?})")]
    TooManyClasses(Vec<f64>),

    #[error("unsupported label encoding {0:?}; expected {{-1,+1}} or {{0,1}}")]
    LabelEncoding(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sketch failed, increase sketch_rows")]
    SketchFailed,

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("LP solver failure: {0}")]
    Lp(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
