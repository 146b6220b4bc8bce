//! Error types shared across the crate.

use crate::lp::LpError;

/// Errors produced by constructors, evaluators, and optimizers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point, report, or state has the wrong number of coordinates.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An argument is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution violates its invariants (probabilities, support).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A utility function violates convexity or continuity requirements.
    #[error("invalid utility: {0}")]
    InvalidUtility(String),

    /// The requested score bound cannot be met; reports the worst pair.
    #[error(
        "score bound {bound} infeasible: exceeded by {excess:.3e} at report {report:?}, state {state:?}"
    )]
    BoundInfeasible {
        bound: f64,
        excess: f64,
        report: Vec<f64>,
        state: Vec<f64>,
    },

    /// A problem instance is malformed (e.g. a mean outside the state hull).
    #[error("invalid instance: {0}")]
    Instance(String),

    /// The embedded linear-program solver failed.
    #[error(transparent)]
    Solver(#[from] LpError),

    /// A condition that the construction guarantees was violated anyway.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
