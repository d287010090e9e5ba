use thiserror::Error;

/// Errors produced by the solver, closed forms, evaluators and scans.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid goal for n={n}: {reason}")]
    InvalidGoal { n: usize, reason: String },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("n={n} is below the minimum {min} for {what}")]
    TooSmall { what: &'static str, n: usize, min: usize },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("dimension mismatch: policy has n={policy}, problem has n={problem}")]
    DimensionMismatch { policy: usize, problem: usize },

    #[error("division by zero in harmonic sum at i={0}")]
    ZeroDenominator(i64),

    #[error("empty simulation")]
    EmptySimulation,

    #[error("subset budget exceeded: C({n},{c}) = {count} > {budget}")]
    BudgetExceeded { n: usize, c: usize, count: u128, budget: u128 },

    #[error("no threshold found: {0}")]
    NoThreshold(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
