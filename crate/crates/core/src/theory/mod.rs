//! Smoothness functions, convergence bounds and the empirical checks that
//! compare runs against them.

use alloc::string::String;

mod bounds;
mod checks;
mod estimators;
mod phi;

pub use bounds::{
    bound_curve, check_bound_dominance, BoundCurve, BoundKind, BoundParams, DominanceReport,
    DominanceRow, MeanTrajectory,
};
pub use checks::{
    check_monotonicity, check_monotonicity_with, MonotonicityReport, MonotonicitySlack,
    MonotonicityViolation, ViolationKind,
};
pub use estimators::{
    bregman, check_phi_descent, estimate_delta_star, estimate_l0l1, estimate_sigma_star,
    l0l1_violation, L0L1Estimate, PhiDescentCheck,
};
pub use phi::{alpha_constants, phi_eval, AlphaConstants, EmpiricalPhi, PhiSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TheoryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("precondition of the {bound} bound not met: {requirement}")]
    Precondition {
        bound: &'static str,
        requirement: String,
    },
    #[error("runs have different horizons: {expected} vs {got} records")]
    HorizonMismatch { expected: usize, got: usize },
    #[error("no runs to average")]
    NoRuns,
}
