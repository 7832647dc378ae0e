use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unit error at line {line}: {msg}")]
    Unit { line: usize, msg: String },

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("beam index {index} out of range for codebook of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("codebook is not DFT-structured; FFT search unavailable")]
    UnsupportedCodebook,

    #[error("candidate set is empty")]
    EmptyCandidateSet,

    #[error("requested {k} neighbours but the database holds only {available} entries")]
    KTooLarge { k: usize, available: usize },

    #[error("unsupported BIM format: {0}")]
    FormatVersionMismatch(String),

    #[error("BIM codebook fingerprint {found} does not match scenario {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("BIM database must hold at least one entry")]
    EmptyDatabase,

    #[error("training overhead of {training} symbols exceeds the block length {block}")]
    OverheadExceedsBlock { training: u64, block: u64 },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
