use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lex error at {line}:{column}: {message}")]
    Lex {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty positive class")]
    EmptyPositiveClass,

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("sequence of length {len} exceeds cap {cap}")]
    SequenceTooLong { len: usize, cap: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("shape mismatch in blocks: {}", .0.join(", "))]
    ShapeMismatch(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures raised while fitting a model (as opposed to bad input).
    pub fn is_training_failure(&self) -> bool {
        matches!(self, Error::Training(_) | Error::NonFinite(_))
    }
}
