use thiserror::Error;

/// Errors raised by the library. The variants map onto the CLI exit-code contract:
/// usage, parse and resource problems are caller mistakes, the rest are runtime failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("arithmetic overflow in exact computation")]
    Overflow,
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_) | Error::Parse(_) | Error::Resource(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
