use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate id `{id}` at row {row}")]
    DuplicateId { id: String, row: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("training data: {0}")]
    Training(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("scorer protocol: {0}")]
    Protocol(String),

    #[error("scorer `{scorer}` timed out after {millis} ms")]
    Timeout { scorer: String, millis: u64 },

    #[error("scoring instances {first}..={last}: {source}")]
    Scoring {
        first: String,
        last: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn parse(row: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            row,
            message: msg.into(),
        }
    }

    /// True for failures that originate in an external scorer.
    pub fn is_protocol(&self) -> bool {
        match self {
            Error::Protocol(_) | Error::Timeout { .. } => true,
            Error::Scoring { source, .. } => source.is_protocol(),
            _ => false,
        }
    }
}
