use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 4 points, got {0}")]
    InvalidGrid(usize),

    #[error("{samples} samples cannot resolve degree {degree} (need at least {required})")]
    UnderResolved { samples: usize, degree: usize, required: usize },

    #[error("coframe entry ({row}, {col}) is not real-valued")]
    NotReal { row: usize, col: usize },

    #[error("matrix field is not symmetric at entry ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("coframe is singular or orientation-reversing at grid index {index} (eps = {eps})")]
    SingularCoframe { index: usize, eps: f64 },

    #[error("zeroth-order potential has imaginary part {0:e}")]
    ComplexPotential(f64),

    #[error("Galerkin matrix Hermiticity residual {residual:e} exceeds {limit:e}; grid too coarse")]
    GridUnderResolution { residual: f64, limit: f64 },

    #[error("Hermitian eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("mode {n} is outside the trackable range |n| <= {limit}")]
    ModeOutOfRange { n: i64, limit: i64 },

    #[error("no eigenvalue pair within {radius} of {n} (nearest at distance {distance:e})")]
    ClusterAmbiguity { n: i64, radius: f64, distance: f64 },

    #[error("input has overlap {overlap:e} with the eigenspace of {lambda0}")]
    NotOrthogonal { lambda0: i64, overlap: f64 },

    #[error("pseudoinverse truncation {truncation} too small, need at least {required}")]
    TruncationTooSmall { truncation: usize, required: usize },

    #[error("first-order block is not scalar (off-diagonal {offdiag:e}, diagonal split {split:e})")]
    DegenerateSplitting { offdiag: f64, split: f64 },

    #[error("fit needs at least {required} eps samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("eps = {0} lies outside the fit window (0, 0.15]")]
    EpsOutOfRange(f64),

    #[error("fit residual {residual:e} exceeds threshold {limit:e}")]
    FitResidual { residual: f64, limit: f64 },

    #[error("unsupported fit order {0} (expected 1, 2 or 4)")]
    FitOrder(usize),

    #[error("parse error: {0}")]
    Parse(String),
}
