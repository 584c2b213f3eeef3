//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("incompatible radicands: sqrt({0}) and sqrt({1}) live in different fields")]
    MixedRadicands(u64, u64),

    #[error("{0} is not squarefree (divisible by {1}^2)")]
    NotSquarefree(u64, u64),

    #[error("singular matrix: lattice basis is degenerate")]
    DegenerateLattice,

    #[error("division by zero in exact arithmetic")]
    DivisionByZero,

    #[error("cannot parse {input:?} as an exact number: {msg}")]
    Parse { input: String, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix dimension {0} exceeds the supported maximum of 8")]
    TooLarge(usize),

    #[error("region shrunk by the border margin is empty")]
    EmptyShrunkRegion,

    #[error("not enough points on the shrunk region (need at least 2)")]
    InsufficientPoints,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("reference cover does not reach this patch; the reference list is too small")]
    CoverIncomplete,

    #[error("pair is not defined on all reachable lattice elements; missing: {0:?}")]
    DomainExtension(Vec<Vec<i64>>),

    #[error("grid size {n} does not align the shift of {q} onto grid cells")]
    GridAlignment { n: usize, q: usize },

    #[error("cell map u does not match the two sections: {0}")]
    InvalidSectionMap(String),

    #[error("coset representatives are not a transversal: {0}")]
    NotTransversal(String),

    #[error("search bound exhausted before the covering closed")]
    Inconclusive,
}

pub type Result<T> = std::result::Result<T, CoreError>;
