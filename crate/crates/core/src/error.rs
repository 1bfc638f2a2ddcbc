use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the modeling core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hyperparameter `{name}` = {value} outside its domain {domain}")]
    OutOfDomain {
        name: String,
        value: String,
        domain: String,
    },
    #[error("non-finite value in field `{field}` of sample {index}")]
    NonFinite { index: usize, field: &'static str },
    #[error("timestamps not strictly increasing at index {0}")]
    NonMonotone(usize),
    #[error("column count mismatch: expected {expected}, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("undefined result: {0}")]
    Undefined(&'static str),
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("channels share no common time span")]
    NoCommonSpan,
    #[error("missing quantity `{0}` after alignment")]
    MissingQuantity(&'static str),
    #[error("insufficient data: need {needed}, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("flight `{0}` was part of the training data")]
    FlightSeenInTraining(String),
}

impl Error {
    /// Numeric failures (divergence, undefined metrics) as opposed to bad
    /// input data or bad configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Diverged { .. } | Error::Undefined(_))
    }

    /// Configuration mistakes a user can fix on the command line.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::OutOfDomain { .. } | Error::InvalidParameter(_))
    }
}
