use std::path::PathBuf;

use thiserror::Error;

/// Broad failure classes. The CLI maps each one onto a distinct exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Parse,
    Model,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: value {value} for `{field}` is outside its allowed range ({allowed})")]
    OutOfRange {
        line: u64,
        field: String,
        value: String,
        allowed: String,
    },

    #[error("invalid time window: end {end} must be greater than start {start}")]
    InvalidWindow { start: i64, end: i64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "observed count {observed} on dyad ({source_id}, {target_id}) exceeds urn capacity {capacity}"
    )]
    ModelInconsistency {
        source_id: String,
        target_id: String,
        observed: u64,
        capacity: u128,
    },

    #[error("signed network is asymmetric on ({0}, {1}): {2} vs {3}")]
    Asymmetric(String, String, f64, f64),

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("feature kind mismatch: model was fit on {expected}, got {found}")]
    FeatureMismatch { expected: String, found: String },

    #[error("score undefined: {0}")]
    Undefined(String),

    #[error("stratification impossible: class {class} has {count} rows but {folds} folds were requested")]
    TooFewForStratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("group too small: {0} nodes remain, at least 3 are required")]
    GroupTooSmall(usize),

    #[error("no positive relations among the attributed nodes")]
    NoPositiveRelations,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Parse { .. }
            | Error::MissingColumn(_)
            | Error::OutOfRange { .. }
            | Error::Json(_) => ErrorKind::Parse,
            Error::NonFinite(_) | Error::Overflow(_) => ErrorKind::Numeric,
            _ => ErrorKind::Model,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
