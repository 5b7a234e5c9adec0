use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid generator name {0:?} (names are nonempty strings over [A-Za-z0-9_], and `1` is reserved for the identity word)")]
    InvalidName(String),

    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),

    #[error("generator index {index} out of range for alphabet of size {size}")]
    GeneratorOutOfRange { index: usize, size: usize },

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    #[error("parse error at token {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("factor alphabets must be disjoint, but {0:?} appears in both")]
    FactorOverlap(String),

    #[error("exponent sum overflow")]
    ExponentOverflow,

    #[error("not a member of the subgroup: {0}")]
    NotAMember(String),

    #[error("{0} must be nontrivial")]
    TrivialInput(&'static str),

    #[error("{what} = {value} out of range (max {max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("name collision: {0:?}")]
    NameCollision(String),

    #[error("invalid stage plan: {0}")]
    Plan(String),

    #[error("enumeration budget exceeded: {candidates} candidates exceed the cap of {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },

    #[error("{0}")]
    Invalid(String),
}
