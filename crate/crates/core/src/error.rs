use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Request exceeds an enumeration or resource bound.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Structurally malformed value, e.g. a mass function that does not sum to one.
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
