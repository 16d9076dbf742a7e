//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("dataset error at line {line}: {message}")]
    DatasetLine { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("non-finite log-likelihood at observation {index} ({context})")]
    NonFiniteLikelihood { index: usize, context: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs (files, configs, parameter
    /// ranges) as opposed to numeric failures during computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidParameter(_)
                | Error::Dataset(_)
                | Error::DatasetLine { .. }
                | Error::SchemaMismatch(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
