use thiserror::Error;

/// Errors raised while building or solving an issue-queue model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("state space of {states} states exceeds the ceiling of {ceiling}")]
    CapacityExceeded { states: u128, ceiling: usize },

    #[error("exact integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("search space of {requested} configurations exceeds the evaluation cap of {cap}")]
    EvaluationCapExceeded { requested: u128, cap: usize },
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn domain(msg: impl Into<String>) -> ModelError {
    ModelError::Domain(msg.into())
}
