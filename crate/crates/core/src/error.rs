//! Error type shared by all pipeline stages.

use thiserror::Error;

/// Errors produced by the radar processing library.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading or writing files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file does not conform to the expected container format.
    #[error("format error: {0}")]
    Format(String),

    /// A file is structurally valid but its payload is damaged or truncated.
    #[error("corrupt data at byte offset {offset}: {detail}")]
    Corrupt { offset: u64, detail: String },

    /// Array or grid dimensions do not match what the operation requires.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: String, got: String },

    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A computation produced a non-finite value where one is forbidden.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A scenario config file failed to parse.
    #[error("config parse error at line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
