//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A geometric or numeric precondition was violated by the caller.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scenario file failed structural or semantic validation. The
    /// message names the offending key.
    #[error("scenario: {0}")]
    Scenario(String),

    /// Underlying I/O failure while reading or writing run artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON in a scenario file.
    #[error("scenario parse: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn scenario(msg: impl Into<String>) -> Self {
        Error::Scenario(msg.into())
    }
}
