use thiserror::Error;

use crate::algebra::TensorAlgebraSpace;

/// Errors raised by the algebra, signature, recovery and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch {
        left: TensorAlgebraSpace,
        right: TensorAlgebraSpace,
    },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("exp requires a zero constant term, found {0}")]
    NonzeroConstantTerm(String),

    #[error("not a group element: constant term is {0}, expected 1")]
    NotGroupElement(String),

    #[error("letter {letter} out of range 1..={dimension}")]
    LetterOutOfRange { letter: usize, dimension: usize },

    #[error("word of length {length} exceeds truncation level {level}")]
    WordTooLong { length: usize, level: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("invalid regularity {0}: must be non-negative")]
    InvalidRegularity(i64),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
