use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A documented precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The ratio denominator vanished (or the pair evaluated to a non-finite value).
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("formulation unavailable: {0}")]
    FormulationUnavailable(String),

    #[error("no closed form: {0}")]
    NoClosedForm(String),

    #[error("not a metric: {0}")]
    NotAMetric(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
