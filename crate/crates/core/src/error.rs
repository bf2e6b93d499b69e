use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("feature row {row} has zero norm")]
    ZeroNorm { row: usize },

    #[error("feature distance undefined for edge ({row}, {next}): {reason}")]
    EdgeDistance {
        row: usize,
        next: usize,
        reason: String,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error(
        "disc cannot be aligned: center {center} and radius {radius} against threshold {threshold}"
    )]
    Infeasible {
        center: f64,
        radius: f64,
        threshold: f64,
    },

    #[error("matrix of dimension {dim} exceeds the dense oracle cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("coefficient matrix is singular: nodes {first}..={last} carry no sample")]
    Singular { first: usize, last: usize },

    #[error("bad feature file: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("index {index} out of range (0..{len})")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid summary: {0}")]
    Summary(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
