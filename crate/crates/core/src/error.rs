use thiserror::Error;

/// Error categories shared across the crate. Display output is prefixed with
/// the category name so callers (and the CLI exit path) can report a stable
/// machine-readable class.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),

    #[error("invalid-state: {0}")]
    InvalidState(String),

    #[error("parse-error: {0}")]
    Parse(String),

    #[error("generation-failure: {0}")]
    Generation(String),

    #[error("configuration-failure: {0}")]
    Configuration(String),

    #[error("io-error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn invalid_state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Stable category slug, e.g. `invalid-argument`.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidState(_) => "invalid-state",
            Error::Parse(_) => "parse-error",
            Error::Generation(_) => "generation-failure",
            Error::Configuration(_) => "configuration-failure",
            Error::Io(_) => "io-error",
        }
    }
}
