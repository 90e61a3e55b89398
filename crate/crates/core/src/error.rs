use thiserror::Error;

use crate::polyhedron::IndexSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TubeError {
    /// 1-based index of the offending constraint.
    #[error("constraint {0} has a zero normal vector")]
    ZeroNormal(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("epsilon polynomials have different degree bounds ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("zero pivot element at row {row}, column {col}")]
    ZeroPivot { row: usize, col: usize },
    #[error("pivot iteration limit {limit} exceeded")]
    IterationLimitExceeded { limit: usize },
    #[error("pivot iteration limit exceeded while testing {subset}")]
    IterationLimitAt { subset: IndexSet },
    #[error("{subset} is not in the candidate family (m = {m}, r = {r})")]
    NotInFamily {
        subset: IndexSet,
        m: usize,
        r: usize,
    },
    #[error("rank {rank} outside 1..={size}")]
    RankOutOfRange { rank: u128, size: u128 },
    #[error("family too large: m = {m} exceeds the supported maximum {max}")]
    FamilyTooLarge { m: usize, max: usize },
    #[error("2^{m} - 1 subsets exceeds the configured cap (m <= {cap})")]
    SizeLimitExceeded { m: usize, cap: usize },
    #[error("invalid permutation: {0}")]
    InvalidOrder(String),
    #[error("covariance matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    ToleranceNotMet { estimate: f64, tolerance: f64 },
    #[error("term {subset}: {source}")]
    Term {
        subset: IndexSet,
        #[source]
        source: Box<TubeError>,
    },
    #[error("tube does not match polyhedron: {0}")]
    TubeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, TubeError>;
