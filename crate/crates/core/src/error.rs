use thiserror::Error;

/// Errors raised by model construction, integration and estimation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("cutoff {cutoff} too small: tail mass {tail:.3e} is not below {limit:.1e}")]
    CutoffTooSmall { cutoff: usize, tail: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("positivity violated at t = {time}: minimum eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("trace drift {drift:.3e} at t = {time} exceeds tolerance")]
    TraceDrift { time: f64, drift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that come from numerical integration rather than bad input.
    pub fn is_numeric_abort(&self) -> bool {
        matches!(
            self,
            Error::PositivityViolation { .. } | Error::TraceDrift { .. }
        )
    }
}
