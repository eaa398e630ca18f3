use thiserror::Error;

/// Errors raised by instance validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input; `path` names the offending field.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error("parameter {name} = {value} is out of range ({expected})")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("side-information symbol {0:?} has zero marginal probability")]
    ZeroMarginal(String),

    /// An enumeration would exceed its configured size limit.
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u128 },

    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
