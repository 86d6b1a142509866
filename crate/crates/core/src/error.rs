use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A simulation configuration violates its invariants or does not fit the requested run.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed caller input (mismatched lengths, empty lists, bad tokens).
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
