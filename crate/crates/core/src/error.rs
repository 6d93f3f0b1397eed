use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("frequency cutoff {cutoff} must be below N/2 = {half}")]
    CutoffTooLarge { cutoff: f64, half: usize },

    #[error("principal symbol is undefined at the zero covector")]
    UndefinedAtZero,

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid covector: {0}")]
    InvalidCovector(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate metric at {x:?}: |det g| = {det:e}")]
    DegenerateMetric { x: Vec<f64>, det: f64 },

    #[error("balls do not cover grid node {index} at {point:?}")]
    CoverFailure { index: usize, point: Vec<f64> },

    #[error("frequency overflow: {0}")]
    FrequencyOverflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
