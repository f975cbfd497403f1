use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The spectral parameter lies where the integral is not defined
    /// (strictly inside the essential band, or on a band edge away from
    /// the two analysed thresholds).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy failure: {reason} (value {value:e}, error estimate {estimate:e})")]
    Accuracy {
        reason: String,
        value: f64,
        estimate: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
