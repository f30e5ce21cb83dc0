use thiserror::Error;

/// Errors produced by codec, parsing and pipeline operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A run-length row whose content is inconsistent (bad sum, interior
    /// zero run). `row` is the zero-based raster row index.
    #[error("corrupt row {row}: {reason}")]
    CorruptRow { row: usize, reason: String },

    /// A malformed on-disk file. `line` is the one-based line number of
    /// the offending file line.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
