//! Local solvability of hyperelliptic models and per-place certificates.

mod count;
mod deficiency;
mod hensel;
mod qp;

pub use count::{count_affine_points, find_smooth_point, singular_points, weil_lower_bound, PointCount};
pub use deficiency::{
    deficiency_at_place, infinity_rational, DeficiencyReport, Hypothesis, PlaceCertificate,
    PlaceClass, ReductionSummary, ResidualClaim, TwistParams, Verdict, DEFAULT_PLACE_BOUND,
    LIFT_PRECISION,
};
pub use hensel::{hensel_lift, LocalPoint};
pub use qp::{qp_points_exist, Chart, QpDecision, QpEmptyTrace, QpEvidence, QpWitness, WitnessKind};

use thiserror::Error;

use crate::arith::ArithError;
use crate::curve::CurveError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error("polynomial is not {0}-integral")]
    NotIntegral(u64),
    #[error("seed is not a point of the reduction")]
    SeedNotOnCurve,
    #[error("seed is singular on the reduction")]
    NonSmoothSeed,
    #[error("at p = 2 an odd seed must satisfy y^2 = f(z) mod 8")]
    TwoAdicSeed,
    #[error("Newton iteration did not converge")]
    LiftFailed,
    #[error("disc search at p = {p} exceeded depth {cap}")]
    DepthExceeded { p: u64, cap: u32 },
    #[error("degree {0} is not supported here")]
    UnsupportedDegree(usize),
    #[error("{0} is not squarefree")]
    NotSquarefree(String),
    #[error("at {place}: hypothesis {hypothesis} fails ({detail})")]
    HypothesisFailed {
        place: String,
        hypothesis: String,
        detail: String,
    },
    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),
    #[error("no local point found at {0}")]
    NoLocalPoint(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
