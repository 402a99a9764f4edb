use thiserror::Error;

/// Errors raised by the library. Every variant names the violated
/// precondition so callers can surface it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mapping must have n >= 1")]
    EmptyMapping,

    #[error("image[{index}] = {value} is outside [1, {n}]")]
    ImageOutOfRange { index: usize, value: usize, n: usize },

    #[error("mapping is not acyclic: cycle {cycle:?}")]
    Cyclic { cycle: Vec<usize> },

    #[error("{what} = {value} is outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("measures have unequal total mass ({left} vs {right})")]
    UnequalMass { left: f64, right: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
