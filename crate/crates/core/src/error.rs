//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by ring and Witt-vector arithmetic.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("ring spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("not a unit: residue vanishes")]
    NotAUnit,
    #[error("not divisible: no exact quotient exists")]
    NotDivisible,
    #[error("matrix not invertible: residue matrix is singular")]
    NotInvertible,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("not in ideal: {0}")]
    NotInIdeal(String),
    #[error("ideal is not square-zero")]
    IdealNotSquareZero,
    #[error("invalid ring spec: {0}")]
    BadSpec(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

/// Errors raised by frame constructions and the deformation machinery.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("not an Eisenstein-shaped polynomial: {0}")]
    BadEisenstein(String),
    #[error("p = {0} is not allowed for this frame kind")]
    BadPrime(u64),
    #[error("extension rule disagrees with f1 on the overlap: {0}")]
    RuleInconsistent(String),
    #[error("iteration budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("not a summand lift of the Hodge filtration: {0}")]
    NotASummandLift(String),
    #[error("incompatible frames or parameters: {0}")]
    Incompatible(String),
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),
}

pub type AResult<T> = Result<T, AlgebraError>;
pub type FResult<T> = Result<T, FrameError>;
