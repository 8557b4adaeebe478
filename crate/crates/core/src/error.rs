use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SrgError>;

#[derive(Debug, Error)]
pub enum SrgError {
    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite entry {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no {0}")]
    ZeroVector(&'static str),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("pairing {0} is not a semi-inner product")]
    NotSip(&'static str),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cosine {0} lies outside [-1, 1] beyond rounding slack")]
    CosineOutOfRange(f64),

    #[error("vector is not on the unit sphere (norm {0})")]
    NotUnit(f64),

    #[error("operator evaluation failed at sample {sample}: {reason}")]
    Evaluation { sample: usize, reason: String },

    #[error("cloud mismatch: {0}")]
    CloudMismatch(String),

    #[error("unsupported cloud format version {found:?} (expected {expected:?})")]
    Version { expected: String, found: String },

    #[error("malformed line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SrgError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SrgError::Io {
            path: path.into(),
            source,
        }
    }
}
