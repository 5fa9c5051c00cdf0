use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum FksError {
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("Hermitian symmetry violated at wavenumber {wavenumber}: relative defect {defect:e}")]
    SymmetryViolation { wavenumber: i64, defect: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected n = {expected}, found n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size {dt:e} fell below dt_min {dt_min:e} at t = {t}")]
    StepSizeUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FksError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        FksError::InvalidParameter(msg.into())
    }

    /// True for failures of the time integration itself (as opposed to bad input).
    pub fn is_integration_abort(&self) -> bool {
        matches!(
            self,
            FksError::StepSizeUnderflow { .. } | FksError::NonFiniteState { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FksError>;
