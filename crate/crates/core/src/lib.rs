//! Stochastic proximal point methods for finite-sum problems.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! parts of the toolkit:
//!
//! - [`problems`]: finite-sum test problems with exact value/gradient oracles
//!   and their known constants.
//! - [`prox`]: exact and inexact solvers for the proximal subproblem
//!   `Ψ(x) = f_i(x) + ‖x − center‖² / (2γ)` plus the inexactness certificate.
//! - [`algorithms`]: SPPM, SPPM with an inexact prox followed by an explicit
//!   gradient step, and an SGD baseline, all producing instrumented
//!   [`Trajectory`](algorithms::Trajectory) records.
//! - [`theory`]: φ-smoothness functions, Bregman divergences, convergence
//!   bound curves and empirical estimators for the constants they need.
//!
//! File formats, configuration and the command line live in the
//! `sppm-harness` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod linalg;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod roots;
pub mod theory;

pub use algorithms::{
    select_uniform_iterate, sgd, sppm, sppm_inexact, IterateRecord, Outcome, RunConfig,
    RunError, StepRecord, Trajectory, UniformIterate,
};
pub use problems::{FiniteSum, ProblemConstants, ProblemError, ProblemInstance, ProblemKind};
pub use prox::{
    prox_exact_radial, prox_inexact, prox_oracle, verify_inexactness, InexactnessCheck,
    InnerMode, InnerSolverConfig, ProxError, ProxQuery, ProxResult, StepPolicy, Termination,
};
