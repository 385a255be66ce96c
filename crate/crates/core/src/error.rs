use thiserror::Error;

/// Errors produced by the decoding and certification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The weighted least-squares system had (numerically) deficient column rank.
    #[error("singular system: {0}")]
    Singular(String),

    /// A computation produced NaN/inf or failed to reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A precondition of a constructive attack did not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed input while reading a file format.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
