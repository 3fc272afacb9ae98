use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A count or dimension is too small or out of range.
    #[error("size error: {0}")]
    Size(String),
    /// A required moment or input is missing.
    #[error("unavailable: {0}")]
    Unavailable(String),
    /// None of the moment conditions B1-B4 applies.
    #[error("no moment condition applies: {0}")]
    NoCondition(String),
    /// Degenerate distribution or parameters (zero variance, zero intensity).
    #[error("degenerate: {0}")]
    Degenerate(String),
    /// Malformed input data (NaN entries, ragged rows).
    #[error("input error: {0}")]
    Input(String),
    /// Inconsistent experiment or CLI configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn size(msg: impl Into<String>) -> Error {
    Error::Size(msg.into())
}
