use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error ({location}): {source}")]
    Io {
        location: String,
        #[source]
        source: io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A numeric argument is outside the domain of the function.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("empty vocabulary: no word occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },

    #[error("insufficient data: need at least {needed} entries, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("empty token stream")]
    EmptyStream,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("too few usable pairs: {used} used, {skipped} skipped (need at least 2)")]
    TooFewPairs { used: usize, skipped: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn io(location: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            location: location.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
