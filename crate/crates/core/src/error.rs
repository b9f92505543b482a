//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]; inapplicability of a bound
//! (e.g. RLD at a phase-extremal point) is *not* an error but a report state,
//! so the variants here cover genuine contract violations and solver failures.

use thiserror::Error;

/// Errors raised by the metrology toolkit.
#[derive(Debug, Error)]
pub enum MetroError {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NonHermitianInput { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {lambda_min:.3e})")]
    NegativeEigenvalue { lambda_min: f64 },

    #[error("argument {x} outside the domain of the principal Lambert branch (x >= -1/e)")]
    DomainError { x: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SDP phase-I found no strictly feasible point")]
    Infeasible,

    #[error("SDP exceeded the iteration budget ({0} Newton steps)")]
    MaxIterations(usize),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("Choi derivative leaves the Choi support; canonical Kraus derivatives undefined")]
    RankDeficientDerivative,

    #[error("channel is phase-extremal; no classical simulation exists")]
    NotClassicallySimulable,

    #[error("tangent-line reach is unbounded on one side (signed derivative is one-signed)")]
    UnboundedEpsilon,

    #[error("state derivative has weight in the density-matrix kernel (residual {residual:.3e})")]
    KernelDerivative { residual: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("probability vanishes at outcome {index} while its derivative does not")]
    SingularPdf { index: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("optimization did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("optimization failure: {0}")]
    OptimizationFailure(String),

    #[error("problem size {requested} exceeds the supported limit {max}")]
    ScaleLimit { requested: usize, max: usize },

    #[error("estimator undefined at pathological point phi0 = {phi:.6}")]
    PathologicalPoint { phi: f64 },

    #[error("bound diverges: {0}")]
    Divergent(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, MetroError>;
