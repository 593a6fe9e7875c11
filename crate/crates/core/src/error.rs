use thiserror::Error;

/// Errors raised by the geometry and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point is not on the hyperboloid: <v,v> + 1 = {defect:e}, x3 = {x3}")]
    NotOnHyperboloid { defect: f64, x3: f64 },

    #[error("point ({y1}, {y2}) is not inside the open unit disc")]
    OutsideDisc { y1: f64, y2: f64 },

    #[error("matrix is not a future-preserving Lorentz isometry (defect {defect:e})")]
    NotLorentzIsometry { defect: f64 },

    #[error("frames are not isometric: Gram mismatch {mismatch:e} exceeds {tolerance:e}")]
    FrameMismatch { mismatch: f64, tolerance: f64 },

    #[error("degenerate convex hull: {0}")]
    DegenerateHull(String),

    #[error("empty sample set")]
    EmptySample,

    #[error("invalid chart grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("matrix is not positive definite at node {node}")]
    NotPositiveDefinite { node: usize },

    #[error("tensor is not self-adjoint with respect to the metric at node {node} (defect {defect:e})")]
    NotSelfAdjoint { node: usize, defect: f64 },

    #[error("surface is not spacelike at ({x1}, {x2}): |Df| = {grad_norm}")]
    NotSpacelike { x1: f64, x2: f64, grad_norm: f64 },

    #[error("query ({x1}, {x2}) lies outside the sampled chart")]
    OutsideChart { x1: f64, x2: f64 },

    #[error("conjugate maximizer reached the boundary ring of the domain at x = ({x1}, {x2})")]
    BoundaryMaximizer { x1: f64, x2: f64 },

    #[error("map is not a local diffeomorphism at node {node} (det dF = {det:e})")]
    Degenerate { node: usize, det: f64 },

    #[error("Gauss-Codazzi precondition failed: gauss residual {gauss:e}, codazzi residual {codazzi:e}, tolerance {tolerance:e}")]
    GaussCodazzi { gauss: f64, codazzi: f64, tolerance: f64 },

    #[error("frame degenerated during integration: Gram drift {drift:e}")]
    FrameDrift { drift: f64 },

    #[error("pullback metrics differ by {mismatch:e} (tolerance {tolerance:e})")]
    PullbackMismatch { mismatch: f64, tolerance: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
