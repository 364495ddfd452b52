use thiserror::Error;

/// Errors raised by the entropy, scenario, oracle and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of a function (e.g. `ln_q` of a non-positive number).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("entropic order must be a finite positive number, got {0}")]
    InvalidOrder(f64),

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("non-finite probability at index {0}")]
    NonFinite(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The caller combined options that do not belong together (e.g. a CHSH pair role
    /// with a Leggett-Garg scenario).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("inconsistent timeline: 2*gamma_dt1 + gamma_dt2 = {actual}, expected {expected}")]
    InconsistentTimeline { actual: f64, expected: f64 },
}

impl Error {
    /// True for errors caused by how the API was called rather than by the numbers passed in.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
