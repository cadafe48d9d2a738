use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical or physical domain.
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An iterative evaluation did not reach the requested tolerance.
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// A quantity is undefined at the requested point (e.g. a pole).
    #[error("{what} is undefined at {value}")]
    Undefined { what: &'static str, value: f64 },

    /// Malformed input data (CSV, parameter file, ...).
    #[error("input error at {path}:{line}: {reason}")]
    Input {
        path: String,
        line: usize,
        reason: String,
    },

    /// Structural problem with a dataset (too short, not increasing, ...).
    #[error("bad dataset: {0}")]
    BadData(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Requested name not present in a registry.
    #[error("unknown {kind} '{name}', valid choices: {choices}")]
    UnknownName {
        kind: &'static str,
        name: String,
        choices: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
