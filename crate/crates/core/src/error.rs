use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("amplitude norm squared {0} exceeds 1")]
    NormExceeded(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("non-finite state at t = {0}")]
    NonFinite(f64),

    #[error("time step {dt} too large: estimated error {estimate:e} exceeds {tolerance:e}")]
    StepTooLarge { dt: f64, estimate: f64, tolerance: f64 },

    #[error("inversion contour hit the branch cut at t = {0}")]
    BranchCut(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
