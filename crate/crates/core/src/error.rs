use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or vector widths do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An API was called out of order or with an argument outside its domain.
    #[error("usage error: {0}")]
    Usage(String),

    /// NaN/Inf showed up where finite values are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// State outside the domain of a transformation (e.g. normalized value >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// The ODE stepper produced a non-finite or negative state.
    #[error("integration failed at t={time}: {detail}")]
    Integration { time: f64, detail: String },

    #[error("config error: {0}")]
    Config(String),

    /// Malformed snapshot / checkpoint bytes.
    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
