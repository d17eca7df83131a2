use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("enumeration would produce more than {cap} elements")]
    CapExceeded { cap: u64 },

    #[error("indices of mixed length in a set expected to have length {expected} (found {found})")]
    MixedLengths { expected: usize, found: usize },

    #[error("cannot concatenate: max entry {left_max} of the prefix exceeds min entry {right_min} of the suffix")]
    OrderViolation { left_max: u32, right_min: u32 },

    #[error("entries must be positive and nondecreasing: {0:?}")]
    InvalidIndex(Vec<u32>),

    #[error("exact weight exceeds the {bits}-bit cap")]
    WeightOverflow { bits: u64 },

    #[error("operation is not defined for the prime sequence: {0}")]
    UnsupportedSequence(&'static str),

    #[error("index with weight {weight} is not a member of J(x) for x = {x}")]
    NotAMember { weight: f64, x: f64 },

    #[error("point has dimension {have}, but coordinate {need} is required")]
    Dimension { have: usize, need: usize },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("{0}")]
    NotApplicable(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed polynomial file: {0}")]
    Format(String),
}
