use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    #[error("window is empty")]
    EmptyWindow,

    #[error("window is degenerate: all samples are zero")]
    DegenerateWindow,

    #[error("signal too short: {available} samples available, {required} required")]
    ShortSignal { available: usize, required: usize },

    #[error("invalid CDF output {value} for sample {sample}")]
    InvalidCdf { value: f64, sample: f64 },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
