use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("matrix must have at least one row")]
    EmptyMatrix,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("entry ({row}, {col}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: String },

    #[error("weights do not form a probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("matrix is not column-stochastic")]
    NotStochastic,

    #[error("matrix is not doubly stochastic")]
    NotDoublyStochastic,

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(char),

    #[error("automaton has no {0:?} end-marker")]
    MissingEndmarker(char),

    #[error("alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },

    #[error("invalid interval: p1 = {p1} must be below p2 = {p2}")]
    InvalidInterval { p1: String, p2: String },

    #[error("state budget exceeded: {needed} states > budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("search cap {cap} exceeded")]
    CapExceeded { cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed automaton: {0}")]
    Malformed(String),

    #[error("regex syntax error at position {pos}: {msg}")]
    RegexSyntax { pos: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
