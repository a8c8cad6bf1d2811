use std::fmt;

use crate::geometry::Point;

/// Errors surfaced by every model in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate value {0} in permutation")]
    DuplicateValue(u32),
    #[error("value {value} out of range 1..={n}")]
    ValueOutOfRange { value: u32, n: usize },
    #[error("empty permutation")]
    EmptyPermutation,
    #[error("bit-reversal family requires a power of two, got n={0}")]
    NotPowerOfTwo(usize),
    #[error("point {0} is not in the point set")]
    PointNotInSet(Point),
    #[error("point set is not a superset of the input")]
    NotSuperset,
    #[error("size limit exceeded: {what} is {actual}, limit is {limit} (raise it with {flag})")]
    LimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
        flag: &'static str,
    },
    #[error("invalid BST trace: {0}")]
    InvalidTrace(String),
    #[error("invalid rectangulation step: {}", join(.0))]
    InvalidState(Vec<crate::rect::Violation>),
    #[error("invalid operation: {0}")]
    InvalidOperation(String),
    #[error("step {index}: {source}")]
    Replay {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid edge-flip {0}")]
    InvalidEdgeFlip(String),
    #[error("transform stuck: no flip or removal available; uncovered pair {q} .. {q_prime}")]
    Stuck { q: Point, q_prime: Point },
    #[error("invariant {which} violated: {detail}")]
    Invariant { which: &'static str, detail: String },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
