use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("problem {problem} needs at least {min} dimensions, got {found}")]
    DimensionTooSmall {
        problem: u32,
        min: usize,
        found: usize,
    },

    #[error("unknown benchmark problem: {0}")]
    UnknownProblem(String),

    #[error("invalid bounds at gene {index}: lower {lower} must be < upper {upper}")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("empty population")]
    EmptyPopulation,

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid statistical input: {0}")]
    InvalidStatInput(String),
}
