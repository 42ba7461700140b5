use thiserror::Error;

/// Errors produced while building, solving or verifying a multi-stage problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon mismatch: expected {expected} stages, got {actual}")]
    HorizonMismatch { expected: usize, actual: usize },

    #[error("expected {expected} stage constraint sets, got {actual}")]
    StageSetCount { expected: usize, actual: usize },

    #[error("input {index} lies outside the declared input box")]
    InputOutOfBounds { index: usize },

    #[error("input set is empty")]
    EmptyInputSet,

    #[error("every state is infeasible at stage {stage}")]
    EmptyProblem { stage: usize },

    #[error("no feasible trajectory from the initial state")]
    NoFeasibleTrajectory,

    #[error("policy returned an input outside U at stage {stage}")]
    PolicyInputOutsideU { stage: usize },

    #[error("objective has no representation maps; it cannot be solved by backward recursion")]
    NotSeparable,

    #[error("objective was not built from additive stage costs")]
    NotAdditive,

    #[error("successor state {state:?} at stage {stage} is feasible but not listed in the exact state space")]
    NotClosed { state: Vec<f64>, stage: usize },

    #[error("state {state:?} is not a member of the exact state space")]
    UnknownState { state: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{what} needs {count} units, exceeding the budget of {budget}")]
    BudgetExceeded { what: &'static str, count: u128, budget: u128 },

    #[error("problem has no initial state")]
    MissingInitialState,

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("config error at `{key}`: expected {expected}")]
    Config { key: String, expected: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
