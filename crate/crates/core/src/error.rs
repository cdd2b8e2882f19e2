use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed instance: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("matching is not stable: {0} blocking pair(s)")]
    Unstable(usize),

    #[error("rotation {0} is not exposed in the matching")]
    NotExposed(String),

    #[error("{what} exceeds cap: {actual} > {cap}")]
    CapExceeded {
        what: &'static str,
        cap: usize,
        actual: usize,
    },

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent lattice: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
