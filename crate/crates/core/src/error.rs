use thiserror::Error;

use crate::alliance::PartitionViolation;

/// Errors raised by the workbench. Message indices in messages are 1-based.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("topology text is empty")]
    EmptyTopology,
    #[error("line {line}: expected {expected} characters, found {found}")]
    RaggedLine {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} lines, found {found}")]
    WrongLineCount { expected: usize, found: usize },
    #[error("line {line}, column {column}: '{found}' is not a binary digit")]
    NonBinary {
        line: usize,
        column: usize,
        found: char,
    },
    #[error("missing direct link: diagonal entry ({index}, {index}) is 0")]
    MissingDirectLink { index: usize },
    #[error("{k} users requested, at most {max} are supported")]
    TooManyUsers { k: usize, max: usize },
    #[error("a topology needs at least one user")]
    NoUsers,
    #[error("index {index} out of range for {k} users")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("mapping is not a bijection on 1..={k}")]
    InvalidPermutation { k: usize },
    #[error("permutation size {found} does not match {expected} users")]
    PermutationSize { expected: usize, found: usize },
    #[error("malformed alliance specification: {0}")]
    MalformedSpec(String),
    #[error("alliance specification is invalid: {}", describe_violations(.0))]
    InvalidSpec(Vec<PartitionViolation>),
    #[error("generalized specification is invalid: {0}")]
    InvalidGeneralizedSpec(String),
    #[error("internal conflict between messages {first} and {second}; no maximal topology contains this one")]
    InternalConflict { first: usize, second: usize },
    #[error("matrix is not in canonical block order")]
    NotCanonical,
    #[error("{what} limited to {max} users, got {k}")]
    ExhaustiveLimit {
        what: &'static str,
        k: usize,
        max: usize,
    },
    #[error("specification does not derive the given topology")]
    SpecTopologyMismatch,
    #[error("message {message} has no alliance in the assignment")]
    InconsistentAssignment { message: usize },
    #[error("channel sampling degenerate after {attempts} attempts")]
    DegenerateChannel { attempts: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transformation left the topology non-maximal: {0}")]
    TransformIncomplete(String),
}

fn describe_violations(v: &[PartitionViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
