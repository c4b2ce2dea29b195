use thiserror::Error;

/// Errors produced by the set-convergence toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point not in set")]
    PointNotInSet,

    #[error("no epigraph in window")]
    NoEpigraph,

    #[error("insufficient boundary samples near the point: {0}")]
    InsufficientSamples(String),

    #[error("unsupported dimension {0} for generator conversion (n <= 3 only)")]
    UnsupportedDimension(usize),

    #[error("modulus is not nondecreasing: value {later} at {later_arg} is below {earlier} at {earlier_arg}")]
    ModulusNotMonotone { earlier_arg: f64, earlier: f64, later_arg: f64, later: f64 },

    #[error("missing {0}")]
    MissingOracle(&'static str),

    #[error("Newton iteration diverged at stage {stage} (last residual {residual:e}, last iterate {iterate:?})")]
    Divergence { stage: usize, residual: f64, iterate: Vec<f64> },

    #[error("non-finite objective: {0}")]
    NonFinite(String),

    #[error("parse error in {what}: {message}")]
    Parse { what: &'static str, message: String },
}

impl Error {
    /// Whether the error is a numerical failure rather than a validation failure.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NonFinite(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(what: &'static str, message: impl std::fmt::Display) -> Self {
        Error::Parse { what, message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
