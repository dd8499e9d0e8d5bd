use crate::propagation::AtomCrossing;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("problem failed validation: {0}")]
    InvalidProblem(String),
    #[error("point {x} is not a really bad point")]
    NotReallyBad { x: f64 },
    #[error("propagation blocked at atom {index} (x = {x})")]
    Blocked {
        index: usize,
        x: f64,
        crossing: Box<AtomCrossing>,
    },
    #[error("base matrix is not symplectic (defect {defect:e})")]
    NonSymplectic { defect: f64 },
    #[error("moment problem has no solution: {0}")]
    MomentUnsolvable(String),
    #[error("no admissible real mu found after {tried} candidates")]
    NoAdmissibleMu { tried: usize },
    #[error("boundary form of the supplied elements does not vanish (defect {defect:e})")]
    GNotZero { defect: f64 },
    #[error("element is not in the maximal relation (residual {residual:e})")]
    NotInTmax { residual: f64 },
    #[error("relation is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("relation is not nonnegative (lower bound {bound:e})")]
    NotNonnegative { bound: f64 },
    #[error("relation pair is not an adjoint pair")]
    AdjointMismatch,
    #[error("problem has density coefficients; only purely atomic w is supported here")]
    HasDensity,
    #[error("limit point endpoint: {0}")]
    LimitPointEnd(String),
    #[error("nonnegativity of the minimal relation was not asserted for a density problem")]
    NonnegativityUnasserted,
    #[error("extension is not self-adjoint: {0}")]
    NotSelfAdjoint(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
