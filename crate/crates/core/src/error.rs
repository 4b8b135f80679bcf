use crate::model::{Action, State};

/// Errors raised by model construction, solvers, and metrics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid capacity grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("state {state:?} is out of range for M={m} with {levels} capacity levels")]
    InvalidState { state: State, m: u32, levels: u32 },

    #[error("the absorbing capacity level has no swap revenue")]
    AbsorbingCapacity,

    #[error("action {action:?} is infeasible at epoch {epoch} in state {state:?}")]
    InfeasibleAction {
        action: Action,
        state: State,
        epoch: usize,
    },

    #[error("epoch {0} is outside the decision horizon")]
    EpochOutOfRange(usize),

    #[error("solve needs {required} table entries, over the configured budget of {budget}")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("policy has {got} decision epochs, scenario expects {expected}")]
    MissingDecisions { got: usize, expected: usize },

    #[error("regression design matrix is rank-deficient: feature `{0}` is degenerate")]
    DegenerateFeature(String),

    #[error("optimality gap is undefined: the exact value is zero")]
    GapUndefined,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}:{line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
