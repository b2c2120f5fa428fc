use thiserror::Error;

use crate::cube::PointMask;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {n} exceeds the limit of {max} variables for this operation")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("point {point:#b} has bits outside the {n}-variable cube")]
    PointOutOfRange { point: PointMask, n: usize },

    #[error("a table over {n} variables needs {expected} values, got {actual}")]
    TableLength { n: usize, expected: usize, actual: usize },

    #[error("value {value} lies outside the range 0..={max}")]
    ValueOutOfRange { value: u64, max: u64 },

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query budget of {budget} exhausted ({requested} more queries requested)")]
    BudgetExhausted { budget: u64, requested: u64 },

    #[error("threshold {theta} is infeasible: {survivors} buckets survive at level {level} (cap {cap})")]
    InfeasibleThreshold {
        theta: f64,
        level: usize,
        survivors: usize,
        cap: usize,
    },

    #[error("class too large to enumerate: {0}")]
    ClassTooLarge(String),

    #[error("agnostic learning is not implemented; only the realizable (promise) setting is supported")]
    AgnosticUnsupported,
}

impl Error {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::PointOutOfRange { .. } => "point_out_of_range",
            Error::TableLength { .. } => "table_length",
            Error::ValueOutOfRange { .. } => "value_out_of_range",
            Error::InvalidTerm(_) => "invalid_term",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::InfeasibleThreshold { .. } => "infeasible_threshold",
            Error::ClassTooLarge(_) => "class_too_large",
            Error::AgnosticUnsupported => "agnostic_unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
