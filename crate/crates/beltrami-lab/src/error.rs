//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was asked to evaluate outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Configuration text could not be parsed.
    #[error("config error at line {line}, key `{key}`: {msg}")]
    Config { key: String, line: usize, msg: String },

    /// A field/profile/mapping key could not be parsed.
    #[error("bad key `{key}`: {msg}")]
    Key { key: String, msg: String },

    /// Malformed grid or mapping file.
    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
