//! Error type shared across the library.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Configuration validation failure with the offending field.
    #[error("config error at `{field}`: {msg}")]
    Config { field: String, msg: String },

    /// Malformed input data (LIBSVM text and friends), with 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A computation produced NaN or infinity.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// Grid search exhausted its budget without hitting the target.
    #[error("no K <= {k_max} reached the target; best achieved grad_norm_sq = {best:.6e}")]
    GridExhausted { k_max: usize, best: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("TOML error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("TOML serialization error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
