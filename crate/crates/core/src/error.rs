use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed structure: indices out of range, length mismatches, invalid trees.
    #[error("structural error: {0}")]
    Structural(String),

    /// Inconsistent generator or optimizer configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Instance or factorization document could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Operation needs White structure information that the instance does not expose.
    #[error("visibility error: {0}")]
    Visibility(String),

    /// Exhaustive enumeration refused because the search space is too large.
    #[error("capacity error: n = {n} exceeds the enumeration limit {limit}")]
    Capacity { n: usize, limit: usize },

    /// Operation called while its precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
