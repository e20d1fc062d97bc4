use thiserror::Error;

use crate::square::QuadParam;
use crate::table::TableSolution;

/// One member of a detected continuum of solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum Representative {
    Square(QuadParam),
    Table(TableSolution),
}

/// Errors produced by the curve, square and table solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radial function is not certified positive: bound {certified_min:.3e} on [{from:.6}, {to:.6}]")]
    NotPositive {
        certified_min: f64,
        from: f64,
        to: f64,
    },

    #[error("invalid quadrilateral parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("solver found no roots; the seed grid is too coarse")]
    SolverCoverageFailure,

    /// A continuum of roots was detected. Carries a representative root.
    #[error("continuum of roots detected ({roots} near-singular roots)")]
    DegenerateFamily {
        roots: usize,
        representative: Box<Representative>,
    },

    #[error("root with Jacobian sigma_min {sigma_min:.3e} is below the genericity floor")]
    GenericityFailure { sigma_min: f64 },

    #[error("homotopy left the positive cone at s = {s}")]
    PositivityLost { s: f64 },

    #[error("continuation lost track of the root at s = {s}")]
    TrackingLoss { s: f64 },

    #[error("tangent vector of length {norm} exceeds the injectivity radius")]
    InjectivityRadiusExceeded { norm: f64 },

    #[error("operation requires an even field")]
    EvennessRequired,

    #[error("invalid spherical harmonic term: {0}")]
    InvalidHarmonic(String),

    #[error("radius {0} outside (0, pi/2]")]
    RadiusOutOfRange(f64),

    #[error("Fourier fit residual {residual:.3e} above target at degree {degree}")]
    FitFailure { residual: f64, degree: usize },

    #[error("table certificate failed: spread {spread:.3e}, square defect {square_defect:.3e}")]
    CertificateFailure { spread: f64, square_defect: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
