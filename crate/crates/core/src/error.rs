use thiserror::Error;

/// Errors raised by the bid-list model, the demand oracle and the learners.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bid vector has a negative coordinate: {0:?}")]
    NegativeCoordinate(Vec<i64>),

    #[error("bid weight must be nonzero")]
    ZeroWeight,

    #[error("price is marginal for the bid list")]
    MarginalPrice,

    #[error("demand is still nonempty at the upper bound {0}")]
    UpperBoundTooSmall(i64),

    #[error("valuation oracle needs positive bids only")]
    NegativeWeight,

    #[error("learner invariant violated: {0}")]
    InvariantViolation(String),

    #[error("point is not within unit L-infinity distance of the record center")]
    OutOfRange,

    #[error("hyperplane {0} is already in the arrangement")]
    DuplicateHyperplane(String),

    #[error("point lies on hyperplane {0}")]
    OnHyperplane(String),

    #[error("no facet found between the witness points")]
    NoFacetFound,

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("valuation of the empty bundle is minus infinity")]
    DomainError,

    #[error("gadget cell {0:?} is not on the lattice 4*[k-1]^n")]
    CellOutOfRange(Vec<i64>),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
