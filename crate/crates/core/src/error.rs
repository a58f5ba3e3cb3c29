use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covariance is not trace class (r = {r}, delta = {delta}); refusing to sample")]
    NotTraceClass { r: f64, delta: f64 },

    #[error(
        "fixed point did not converge within {max_iter} iterations \
         (last contraction estimate {contraction_est})"
    )]
    StepRejected { max_iter: usize, contraction_est: f64 },

    #[error("step rejection persisted after {halvings} timestep halvings")]
    RetryExhausted { halvings: usize },

    #[error("test bump support is clipped by the domain: {0}")]
    BumpClipped(String),

    #[error("decomposition inconsistency: {0}")]
    DecompositionMismatch(String),

    #[error("ensemble too small: got {got}, need at least {need}")]
    EnsembleTooSmall { got: usize, need: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
