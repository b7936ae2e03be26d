use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("vector is not unit timelike (pairing = {norm})")]
    NotUnitTimelike { norm: f64 },
    #[error("vector is past-directed")]
    PastDirected,
    #[error("surface is degenerate (not spacelike) at the sampled point")]
    Degenerate,
    #[error("frame points do not lie on a common fiber (base mismatch {residual})")]
    FiberMismatch { residual: f64 },
    #[error("fiber gap jumps by {jump} between homotopy samples; refine the homotopy")]
    WindingAmbiguity { jump: f64 },
    #[error("loop endpoints differ by {residual}")]
    EndpointMismatch { residual: f64 },
    #[error("path is too coarse: consecutive samples at distance {step} exceed the bound {bound}")]
    StepTooCoarse { step: f64, bound: f64 },
    #[error("finite differences disagree across step sizes (residual {residual}); path may not be differentiable")]
    NonDifferentiable { residual: f64 },
    #[error("operation requires a diagonal or conjugate representation class")]
    UnsupportedRepClass,
    #[error("linear solve failed to converge (residual {residual})")]
    SingularSolve { residual: f64 },
    #[error("quadrature failed to converge (estimate gap {gap})")]
    QuadratureDiverged { gap: f64 },
    #[error("trajectory left the region covered by the mesh interpolant")]
    OutOfDomain,
}

pub type Result<T> = std::result::Result<T, GeomError>;
