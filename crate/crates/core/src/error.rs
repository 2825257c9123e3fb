use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty configuration")]
    EmptyConfiguration,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no solution in (0,pi)")]
    NoSolution,

    #[error("degenerate: every psi solves the equation")]
    Degenerate,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("eigen-solver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("missing rotation mode")]
    MissingRotationMode,

    #[error("non-finite state encountered at step {step}")]
    NonFinite { step: usize },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
