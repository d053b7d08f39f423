use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure (quadrature, extrapolation, series) failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A predicate could not be certified either way.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    /// The case is excluded by construction (e.g. resonant Frobenius exponents).
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A process or law description could not be parsed or is invalid.
    #[error("spec error: {0}")]
    Spec(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn inconclusive(msg: impl Into<String>) -> Self {
        Error::Inconclusive(msg.into())
    }

    /// Short machine-readable tag, used by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Inconclusive(_) => "inconclusive",
            Error::Unsupported(_) => "unsupported",
            Error::Spec(_) => "spec",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
