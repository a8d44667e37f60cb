use thiserror::Error;

/// Errors produced by depth computations and private mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DepthError {
    #[error("empty input")]
    EmptyInput,

    #[error("input error at row {row}: {reason}")]
    Input { row: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("depth kind {kind} is not supported by {operation}")]
    UnsupportedKind {
        kind: String,
        operation: &'static str,
    },

    #[error("exact simplicial depth needs {required} subsets, above the cap of {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("enumeration guard exceeded: {required} evaluations, limit {limit}")]
    GuardExceeded { required: u128, limit: u128 },

    #[error("every candidate has zero weight")]
    AllWeightsZero,
}

pub type Result<T> = std::result::Result<T, DepthError>;

impl DepthError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DepthError::InvalidParameter(msg.into())
    }
}
