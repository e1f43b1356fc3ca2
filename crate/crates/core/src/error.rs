use thiserror::Error;

use crate::model::Element;

/// Errors raised by the fault model and the sorting/search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid comparison: element {0} compared with itself")]
    InvalidComparison(Element),

    #[error("element {element} outside 1..={n}")]
    ElementOutOfRange { element: Element, n: usize },

    #[error("invalid fault model: {0}")]
    InvalidModel(String),

    #[error("error probability p={p}, q={q} outside the admissible range for this algorithm")]
    ModelOutOfRange { p: f64, q: f64 },

    #[error("matrix storage requested for n={n}, cap is {cap}")]
    MatrixTooLarge { n: usize, cap: usize },

    #[error("instance too large: n={n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),

    #[error("query element {0} is already in the searched sequence")]
    InvalidQuery(Element),

    #[error("subset size {h} out of range for a set of {len} elements")]
    SubsetOutOfRange { h: usize, len: usize },

    #[error("random bit budget exhausted after {consumed} bits")]
    BitsExhausted { consumed: u64 },

    #[error("bit extraction needs at least one input")]
    EmptyXor,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
