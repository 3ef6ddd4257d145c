use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Estimation(#[from] ssinfer::Error),

    /// More than the tolerated share of replications failed.
    #[error("{failed} of {reps} replications failed; first failure: {first}")]
    TooManyFailures { failed: usize, reps: usize, first: String },

    #[error("undefined: {0}")]
    Undefined(String),
}

impl SimError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
