use thiserror::Error;

/// Errors raised by the oracle, learner and harness layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the decision set")]
    DomainViolation { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid of {required} points exceeds the oracle budget of {budget} points")]
    GridBudget { required: u128, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample must contain at least one loss")]
    EmptySample,

    #[error("length mismatch: trajectory has {trajectory} rounds but {losses} losses were given")]
    LengthMismatch { trajectory: usize, losses: usize },

    #[error("operation requires a single-draw trajectory")]
    WrongNoiseMode,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
