use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid tree code {0:?}")]
    InvalidTreeCode(String),

    #[error("invalid month {0:?}, expected YYYY-MM")]
    InvalidMonth(String),

    #[error("unknown tree code {0}")]
    UnknownTreeCode(String),

    #[error("unknown article id {0}")]
    UnknownArticle(u64),

    #[error("duplicate article id {id} (line {line})")]
    DuplicateArticle { id: u64, line: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
