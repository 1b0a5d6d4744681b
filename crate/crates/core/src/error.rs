//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical kernels and the landscape tools.
///
/// Variants are grouped loosely into input validation problems (bad shapes,
/// violated plant invariants) and numerical outcomes (instability, singular
/// blocks, failed convergence). [`Error::is_validation`] tells the two apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("coefficient matrix is not stable (margin {margin:.3e})")]
    UnstableCoefficient { margin: f64 },
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),
    #[error("pair (A, B) is not stabilizable")]
    NotStabilizable,
    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),
    #[error("similarity transform is singular (reciprocal condition {rcond:.3e})")]
    SingularTransform { rcond: f64 },
    #[error("evaluation point hits a controller pole")]
    PoleHit,
    #[error("controller is not controllable")]
    NotControllable,
    #[error("operation requires a single-input single-output system")]
    NotSiso,
    #[error("controller is not minimal (controllable and observable)")]
    NonMinimalController,
    #[error("controller does not stabilize the plant (margin {margin:.3e})")]
    NotStabilizing { margin: f64 },
    #[error("controller has a nonzero feedthrough term")]
    NotStrictlyProper,
    #[error("plant assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("controller is not stationary (gradient norm {grad_norm:.3e})")]
    NotStationary { grad_norm: f64 },
    #[error("padding block is not stable")]
    UnstablePadding,
    #[error("open-loop plant is not stable")]
    PlantNotStable,
    #[error("matrix is not diagonalizable (eigenvector condition {cond:.3e})")]
    NonDiagonalizable { cond: f64 },
    #[error("lift invariant violated: {0}")]
    InvariantViolated(String),
    #[error("no path found: {0}")]
    NoPathFound(String),
    #[error("pole placement failed: {0}")]
    PlacementFailed(String),
    #[error("gave up after {attempts} attempts")]
    RetriesExhausted { attempts: usize },
}

impl Error {
    /// True for errors caused by malformed or inconsistent input rather than
    /// by the numerics of a well-posed problem.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonSquare { .. }
                | Error::DimensionMismatch(_)
                | Error::Invalid(_)
                | Error::NotStrictlyProper
                | Error::NotSiso
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
