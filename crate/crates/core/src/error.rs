//! Crate-wide error type.

use crate::lattice::VertexId;

/// Errors reported by lattice construction, solvers and evaluators.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("angles must be strictly acute: alpha={alpha}, beta={beta}, gamma={gamma}")]
    NonAcuteAngles { alpha: f64, beta: f64, gamma: f64 },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("origin is not an interior vertex of the carved subcomplex")]
    NoInteriorOrigin,
    #[error("carved subcomplex is not homeomorphic to a closed disc: {0}")]
    NotADisc(String),
    #[error("delta {delta} exceeds distance {distance} to the domain complement")]
    DeltaTooLarge { delta: f64, distance: f64 },
    #[error("degenerate triangle with edge lengths ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
    #[error("triangle inequality violated during Newton iteration (damping floor reached)")]
    TriangleInequalityViolation,
    #[error("Newton iteration did not converge within {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("laid-out face at {0:?} is negatively oriented")]
    OrientationFlip(VertexId),
    #[error("point {0} lies outside the support of the subcomplex")]
    OutsideSupport(num_complex::Complex64),
    #[error("coincident points in cross-ratio or Möbius construction")]
    CoincidentPoints,
    #[error("edge [{0:?}, {1:?}] is not an interior edge")]
    BoundaryEdge(VertexId, VertexId),
    #[error("required face at {0:?} is missing from the subcomplex")]
    MissingFace(VertexId),
    #[error("Möbius transformation has a pole at {0}")]
    PoleHit(num_complex::Complex64),
    #[error("point {0} is outside the validity domain of the analytic function")]
    OutsideDomain(num_complex::Complex64),
    #[error("S1+S2+S3 = {0} is not zero within tolerance")]
    InconsistentS(num_complex::Complex64),
    #[error("need at least 3 positive data points for an order fit, got {0}")]
    InsufficientData(usize),
    #[error("all errors are below 1e-13; convergence order is not measurable (exact)")]
    ZeroError,
    #[error("invalid field access at vertex {0:?}")]
    MissingValue(VertexId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
