use thiserror::Error;

/// Errors raised while planning, building, or checking circuits.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The problem description is inconsistent or out of range.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    /// The parameters are valid but the requested construction does not apply.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A circuit or gate violates the IR's structural rules.
    #[error("malformed circuit: {0}")]
    Structural(String),
    /// Serialized input could not be decoded.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Unsupported(_) => "unsupported",
            Error::Structural(_) => "structural",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
