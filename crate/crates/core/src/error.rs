use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid subsystem index {0}, expected 1 or 2")]
    InvalidSubsystem(usize),

    #[error("dimension {0} is below the minimum of 2")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("parameter `{name}` = {value} is out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("channel has no Kraus operators")]
    EmptyKraus,

    #[error("Kraus list is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("permutation arity {0} exceeds the enumeration guard")]
    PermutationGuard(usize),

    #[error("invalid permutation mapping")]
    InvalidPermutation,

    #[error("arity mismatch: {ops} operators for a permutation on {k} points")]
    ArityMismatch { ops: usize, k: usize },

    #[error("moment term budget exceeded: {terms} terms > budget {budget}")]
    BudgetExceeded { terms: u128, budget: u128 },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("variance {0:.3e} is negative beyond rounding tolerance")]
    NegativeVariance(f64),

    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("invalid channel file: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
