use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exact integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("vertex {vertex} is out of range for n = {n}")]
    BadVertex { vertex: u32, n: usize },

    #[error("malformed vertex set: {0}")]
    BadSet(String),

    #[error("{what} = {value} is out of range (limit {limit})")]
    BadRank {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("Kneser graph K({n},{s}) needs n >= 2s")]
    DegenerateKneser { n: usize, s: usize },

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("{what} needs {size} items, over the budget of {budget}")]
    TooLarge {
        what: &'static str,
        size: u128,
        budget: u128,
    },

    #[error("stop size {s} must be smaller than the edge size {r}")]
    StopTooLarge { s: usize, r: usize },

    #[error("s = {s} is not a loose level for r = {r} (need 1 <= s <= r/2)")]
    NotLoose { s: usize, r: usize },

    #[error("eigensolver did not converge at index {index}")]
    EigenFail { index: usize },

    #[error("auxiliary graph is disconnected: {0}")]
    Disconnected(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("scaling radius must be positive, got {0}")]
    BadRadius(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("walk is not good: edge {0} occurs only once")]
    NotGood(usize),

    #[error("malformed walk code: {0}")]
    BadCode(String),

    #[error("empty s-set family")]
    EmptyFamily,

    #[error("s-set with rank {0} has zero degree")]
    ZeroDegree(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
