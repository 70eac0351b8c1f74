use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates an operation's precondition (shape, label domain, empty class...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An object was driven through an illegal sequence of calls.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// Malformed text input. `row` is 1-based; 0 means the whole file.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// Malformed binary or structured input (IDX headers, checkpoints).
    #[error("format error: {0}")]
    Format(String),

    /// Experiment configuration is unusable; raised before any training starts.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
