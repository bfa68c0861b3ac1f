use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid scale bound M = {0}; must be positive")]
    InvalidScale(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("query budget of {total} exhausted")]
    BudgetExhausted { total: usize },

    #[error("streaming violation: query {query} addressed sample {requested}, expected {expected}")]
    StreamingViolation {
        query: usize,
        requested: usize,
        expected: usize,
    },

    #[error("sample index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("membership query with trivial set (empty or all {n_classes} classes)")]
    TrivialSet { n_classes: usize },

    #[error("query kind not supported by this oracle: {0}")]
    UnsupportedQuery(&'static str),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("Weiszfeld iteration did not converge in {iterations} iterations (last step {last_step:e})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        last_iterate: Vec<f64>,
    },

    #[error("game solver stopped with duality gap {gap:e} above target {target:e}")]
    GapNotReached { gap: f64, target: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Data(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
