use thiserror::Error;

use crate::lattice::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid functional: {0}")]
    InvalidFunctional(String),

    #[error("endpoint {which} out of bounds: {detail}")]
    EndpointOutOfBounds { which: &'static str, detail: String },

    #[error("invalid path: {0}")]
    InvalidPath(Violation),

    /// Enumeration would visit more paths than allowed. `count` saturates at
    /// `u128::MAX`.
    #[error("refusing to enumerate {count} paths (cap is {cap})")]
    CapExceeded { count: u128, cap: u128 },

    #[error("transfer matrix needs {needed} entries, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("no admissible path from site {from} to site {to}")]
    NoAdmissiblePath { from: i64, to: i64 },

    #[error("kernel provenance mismatch: {0}")]
    ProvenanceMismatch(String),

    #[error("kernel column from site {0} is identically zero; no normalizable pdf")]
    ZeroColumn(i64),

    #[error("pdf is not normalized")]
    UnnormalizedPdf,

    #[error("invalid scan: {0}")]
    InvalidScan(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A weight overflowed, e.g. a euclidean sum under an inverted potential.
    #[error("non-finite amplitude: {0}")]
    NonFinite(String),

    #[error("malformed kernel file: {0}")]
    Malformed(String),
}
