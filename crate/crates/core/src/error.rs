use thiserror::Error;

/// Errors raised by the numeric and enumeration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision exhausted at {max_bits} bits: comparison could not be separated")]
    PrecisionExhausted { max_bits: u32 },
    #[error("radicand {0} is a perfect square")]
    NonsquareViolation(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("resonance at q = {0:?}: alpha . q is an integer")]
    Resonance(Vec<i64>),
    #[error("output cap of {cap} elements exceeded")]
    OutputCapExceeded { cap: usize },
    #[error("pair enumeration cap of {cap} points exceeded ({points} points)")]
    PairCapExceeded { cap: u64, points: u64 },
    #[error("x = {x} lies outside the tabulated range (q_max = {q_max})")]
    OutOfRange { x: f64, q_max: f64 },
    #[error("gap_upper requires phi(2Q)")]
    MissingPhi2Q,
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
