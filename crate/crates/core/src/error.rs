use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point pair or step falls outside the ball on which the exponential map is invertible.
    #[error("domain error: {what} (injectivity radius {radius})")]
    Domain { what: String, radius: f64 },

    #[error("{manifold} does not provide {operation}")]
    Capability { manifold: String, operation: &'static str },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(what: impl Into<String>, radius: f64) -> Self {
        Error::Domain {
            what: what.into(),
            radius,
        }
    }

    pub(crate) fn capability(manifold: impl Into<String>, operation: &'static str) -> Self {
        Error::Capability {
            manifold: manifold.into(),
            operation,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
