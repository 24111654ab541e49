use thiserror::Error;

/// Errors produced anywhere in the processing chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical kernels (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_) | Error::NonConvergence { .. } | Error::Singular(_)
        )
    }

    pub(crate) fn dims(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
