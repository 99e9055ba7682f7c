use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("position {position} is out of range for {m} candidates")]
    InvalidPosition { position: usize, m: usize },
    #[error("force {value} at position {position} violates bounds [{lower}, {upper}]")]
    InfeasibleForce {
        position: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("LP solver failed: {0}")]
    NumericalFailure(String),
    #[error("LP reported infeasible subproblem (zero force should always be feasible)")]
    LpInfeasible,
    #[error("position {0} is already selected")]
    DuplicateSelection(usize),
    #[error("invalid budget {budget} for {m} candidates")]
    InvalidBudget { budget: usize, m: usize },
    #[error("enumeration of C({m}, {budget}) = {count} subsets exceeds the guard of {limit}")]
    TooLarge {
        m: usize,
        budget: usize,
        count: u128,
        limit: u128,
    },
    #[error("invalid action {0}: position is masked")]
    InvalidAction(usize),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("no unmasked action available")]
    NoAction,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(&'static str),
    #[error("generation error: {0}")]
    Generation(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
