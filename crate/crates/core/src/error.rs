use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid for delta = {delta} needs {samples} samples, budget is {budget}")]
    BudgetExceeded { delta: f64, samples: u128, budget: u64 },
    #[error("grid undersampled: {0}")]
    Undersampled(String),
    #[error("fit needs at least {needed} distinct points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, LabError>;
