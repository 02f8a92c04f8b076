use thiserror::Error;

/// Errors raised by the inference engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a probability vector needs at least 2 entries, got {0}")]
    TooFewCategories(usize),
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, which is off from 1 by more than {tolerance}")]
    SumNotOne { sum: f64, tolerance: f64 },
    #[error("entry {index} is not finite")]
    NonFiniteEntry { index: usize },
    #[error("the count vector is empty (total is 0)")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("density diverges at the boundary: theta[{index}] = 0 with shape {shape} < 1")]
    BoundaryDivergence { index: usize, shape: f64 },
    #[error("{0} is out of range")]
    OutOfRange(&'static str),
    #[error("symbol {symbol} is outside the channel alphabet of size {alphabet}")]
    UnknownSymbol { symbol: usize, alphabet: usize },
    #[error("observation kind {observed:?} does not match a {expected:?} channel")]
    KindMismatch {
        expected: crate::data::ObservationKind,
        observed: crate::data::ObservationKind,
    },
    #[error("emission row {row} sums to {sum}")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("the evidence integral vanishes (log evidence {log_evidence})")]
    ZeroEvidence { log_evidence: f64 },
    #[error("the likelihood evaluated to NaN")]
    NonFinite,
    #[error("the likelihood vanishes at the maximiser of the monomial")]
    DegenerateLikelihood,
}

pub type Result<T> = std::result::Result<T, Error>;
