use thiserror::Error;

/// Library-wide error type.
///
/// `Argument` and `SizeLimit` flag misuse of an API (bad indices, odd
/// dimensions, caps exceeded) and are distinct from `Numerical`, which
/// signals that a computation produced internally inconsistent results
/// (probabilities that fail to normalize, determinants that should be
/// non-negative but are not, factorizations that fail to converge).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::SizeLimit(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
