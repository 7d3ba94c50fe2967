use thiserror::Error;

use crate::algebra::Vec3R;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero momentum")]
    ZeroMomentum,

    #[error("momentum {k:?} lies outside the domain of gauge {gauge}")]
    OutsideDomain { gauge: String, k: Vec3R },

    #[error("finite-difference stencil at {k:?} (step {step:e}) leaves the domain of gauge {gauge}")]
    StencilOutsideDomain { gauge: String, k: Vec3R, step: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("section has no analytic Jacobian and finite differences are disabled")]
    MissingDerivative,

    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e} after {evaluations} evaluations")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("ODE step size underflow at tau = {tau}")]
    StepUnderflow { tau: f64 },

    #[error("curve is not closed (gap {gap:e})")]
    OpenCurve { gap: f64 },

    #[error("curve passes within {distance:e} of the excluded ray of gauge {gauge}")]
    CurveNearCut { gauge: String, distance: f64 },

    #[error("extrapolation sequence diverges")]
    DivergentSequence,

    #[error("closed form is not a pointwise function here: {0}")]
    DistributionalDomain(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
