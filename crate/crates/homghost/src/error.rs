use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation produced a state with no surviving amplitude. This is a
    /// physical outcome (e.g. full HOM bunching), not a numeric failure, and
    /// is reported separately so callers can branch on it.
    #[error("empty state: {0}")]
    EmptyState(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn empty(msg: impl Into<String>) -> Self {
        Error::EmptyState(msg.into())
    }
}
