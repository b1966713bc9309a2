use std::path::PathBuf;

/// Errors produced by the huefuse library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("i/o error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed or unsupported file contents.
    #[error("{0}")]
    Format(String),

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    /// Invalid argument or stack contents (empty stack, bad EV list, ...).
    #[error("{0}")]
    InvalidInput(String),

    /// Response-curve calibration failed.
    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
