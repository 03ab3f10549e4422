use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or adaptive procedure hit its iteration / node cap.
    #[error("convergence failure in {what}: {detail}")]
    Convergence { what: &'static str, detail: String },

    /// A coordinate index was outside `0..dim`.
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// Points or multiplicity vectors of mismatched dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// `exp` of the requested log-value does not fit in an `f64`.
    #[error("overflow: log-value {0} exceeds the f64 range")]
    Overflow(f64),

    /// A field evaluation failed or produced a non-finite value.
    #[error("field evaluation failed: {0}")]
    Field(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
