use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point component {index} = {value} lies outside [{lower}, {upper}]")]
    DomainViolation {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective returned a non-finite value {value} at evaluation {eval_index}")]
    NonFiniteValue { value: f64, eval_index: u64 },

    #[error("evaluation budget exhausted: {needed} evaluations needed, {remaining} remaining")]
    BudgetExhausted { needed: usize, remaining: usize },

    #[error("unknown partition id {0}")]
    UnknownPartition(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown problem: {0}")]
    UnknownProblem(String),

    #[error("empty manifest")]
    EmptyManifest,

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
