use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label `{0}` appears more than once")]
    LabelCollision(String),

    #[error("label `{0}` is not part of the factorization")]
    LabelNotFound(String),

    #[error("operator is not Hermitian (max |M - M^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("invalid Schatten/Renyi order {0}")]
    InvalidOrder(f64),

    #[error("operands live on different spaces: {0}")]
    SpaceMismatch(String),

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("rank {rank} is outside 1..={dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("target dimension {available} is smaller than the required {required}")]
    DimensionTooSmall { required: usize, available: usize },

    #[error("total dimension {dim} exceeds the cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("index {index} out of range for {bound} copies")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("subset must be nonempty")]
    EmptySubset,

    #[error("Kraus operators are not trace preserving (max |sum K^dag K - 1| = {0:.3e})")]
    NotTracePreserving(f64),

    #[error("input dimension {dim} exceeds the optimization budget {budget}")]
    OptimizationBudgetExceeded { dim: usize, budget: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
