//! Outer loops: SPPM, SPPM with an inexact prox, and SGD.
//!
//! All three share one driver. At outer iteration `k` the driver records the
//! state `x_k`, stops on divergence or (optionally) convergence, samples
//! `ξ_k` from `(seed, k)` and applies the method's update. A trajectory with
//! `K` outer iterations has `K + 1` records; the last one carries no step.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg;
use crate::problems::{FiniteSum, ProblemError, ProblemInstance};
use crate::prox::{
    self, prox_inexact, prox_oracle, InnerMode, InnerSolverConfig, ProxError, ProxQuery,
};
use crate::rng::{self, ComponentSampler, Stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("SPPM needs the exact inner mode")]
    RequiresExactInner,
    #[error("prox failed at outer iteration {iteration}: {source}")]
    Prox { iteration: usize, source: ProxError },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    pub gamma: f64,
    pub x0: Vec<f64>,
    /// Number of outer iterations `K`.
    pub iterations: usize,
    pub seed: u64,
    pub inner: InnerSolverConfig,
    /// Diverged once `‖x_k − x*‖² > threshold · (1 + ‖x_0 − x*‖²)`.
    pub divergence_threshold: f64,
    /// Converged at the first `k` with `‖x_k − x*‖² ≤ rtol · ‖x_0 − x*‖²`.
    pub rtol: f64,
    pub stop_on_convergence: bool,
    /// Solve every subproblem exactly as well and record the realized
    /// inexactness `γ²‖∇Ψ(x̂)‖² / ‖x_k − x^Ψ‖²`.
    pub measure_inexactness: bool,
}

impl RunConfig {
    pub fn new(gamma: f64, x0: Vec<f64>, iterations: usize, seed: u64) -> Self {
        Self {
            gamma,
            x0,
            iterations,
            seed,
            inner: InnerSolverConfig::exact(),
            divergence_threshold: 1e8,
            rtol: 1e-10,
            stop_on_convergence: false,
            measure_inexactness: false,
        }
    }

    pub fn with_inner(mut self, inner: InnerSolverConfig) -> Self {
        self.inner = inner;
        self
    }

    pub fn validate(&self, p: &ProblemInstance) -> Result<(), RunError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(RunError::Config("gamma must be positive and finite"));
        }
        if self.iterations == 0 {
            return Err(RunError::Config("at least one outer iteration is required"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(RunError::Config("divergence threshold must be positive"));
        }
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(RunError::Config("rtol must be nonnegative and finite"));
        }
        self.inner
            .validate()
            .map_err(|e| RunError::Prox { iteration: 0, source: e })?;
        p.check_point(&self.x0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    Converged { at: usize },
    Completed,
    Diverged { at: usize },
}

/// The update taken from `x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub component: usize,
    pub inner_iterations: usize,
    /// `‖∇Ψ_k(x̂_k)‖²` of the subproblem solution used by the step.
    pub psi_grad_sq: f64,
    /// `‖x_k − x_{k+1}‖²`.
    pub step_norm_sq: f64,
    pub realized_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterateRecord {
    pub k: usize,
    /// `‖x_k − x*‖²`.
    pub dist_sq: f64,
    /// `f(x_k) − f*`.
    pub gap: f64,
    pub step: Option<StepRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: RunConfig,
    pub records: Vec<IterateRecord>,
    pub outcome: Outcome,
    /// Expected gap `E[f(x̂)] − f*` of an iterate drawn uniformly from the
    /// outer iterates `x_0, …, x_{m−1}` (`m` = steps taken).
    pub uniform_iterate_gap: f64,
    /// Largest realized inexactness over the run, when measured.
    pub measured_c: Option<f64>,
    pub final_point: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.records.iter().filter(|r| r.step.is_some()).count()
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.step)
            .map(|s| s.inner_iterations)
            .sum()
    }

    pub fn initial_dist_sq(&self) -> f64 {
        self.records[0].dist_sq
    }

    pub fn final_dist_sq(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.dist_sq)
    }

    /// First `k` with `‖x_k − x*‖² ≤ fraction · ‖x_0 − x*‖²`.
    pub fn iterations_to(&self, fraction: f64) -> Option<usize> {
        let target = fraction * self.initial_dist_sq();
        self.records.iter().find(|r| r.dist_sq <= target).map(|r| r.k)
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self.outcome, Outcome::Diverged { .. })
    }
}

struct StepOutput {
    inner_iterations: usize,
    psi_grad_sq: f64,
    realized_c: Option<f64>,
}

enum StepFailure {
    Diverged,
    Prox(ProxError),
}

fn drive<F>(p: &ProblemInstance, cfg: &RunConfig, mut step: F) -> Result<Trajectory, RunError>
where
    F: FnMut(&[f64], usize, &mut Vec<f64>) -> Result<StepOutput, StepFailure>,
{
    cfg.validate(p)?;
    let x_star = p.minimizer();
    let mut x = cfg.x0.clone();
    let mut next = vec![0.0; p.d()];
    let dist0 = linalg::dist_sq(&x, x_star);
    let threshold = cfg.divergence_threshold * (1.0 + dist0);
    let mut sampler = ComponentSampler::new(cfg.seed, p.n());
    let mut records: Vec<IterateRecord> = Vec::with_capacity(cfg.iterations.min(1 << 20) + 1);
    let mut converged_at = None;
    let mut diverged_at = None;
    let mut measured_c: Option<f64> = None;

    for k in 0..=cfg.iterations {
        let dist_sq = linalg::dist_sq(&x, x_star);
        let gap = if linalg::all_finite(&x) { p.value(&x) - p.f_star() } else { f64::NAN };
        records.push(IterateRecord { k, dist_sq, gap, step: None });
        if !(dist_sq.is_finite() && gap.is_finite()) || dist_sq > threshold {
            diverged_at = Some(k);
            break;
        }
        if converged_at.is_none() && dist_sq <= cfg.rtol * dist0 {
            converged_at = Some(k);
            if cfg.stop_on_convergence {
                break;
            }
        }
        if k == cfg.iterations {
            break;
        }
        let component = sampler.component(k as u64);
        match step(&x, component, &mut next) {
            Ok(out) => {
                if let Some(c) = out.realized_c {
                    measured_c = Some(measured_c.map_or(c, |m: f64| m.max(c)));
                }
                records[k].step = Some(StepRecord {
                    component,
                    inner_iterations: out.inner_iterations,
                    psi_grad_sq: out.psi_grad_sq,
                    step_norm_sq: linalg::dist_sq(&x, &next),
                    realized_c: out.realized_c,
                });
                core::mem::swap(&mut x, &mut next);
            }
            Err(StepFailure::Diverged) => {
                diverged_at = Some(k);
                break;
            }
            Err(StepFailure::Prox(source)) => {
                return Err(RunError::Prox { iteration: k, source });
            }
        }
    }

    let outcome = match (diverged_at, converged_at) {
        (Some(at), _) => Outcome::Diverged { at },
        (None, Some(at)) => Outcome::Converged { at },
        (None, None) => Outcome::Completed,
    };
    let steps = records.iter().filter(|r| r.step.is_some()).count();
    let uniform_iterate_gap = if steps == 0 {
        records[0].gap
    } else {
        records[..steps].iter().map(|r| r.gap).sum::<f64>() / steps as f64
    };
    Ok(Trajectory {
        config: cfg.clone(),
        records,
        outcome,
        uniform_iterate_gap,
        measured_c,
        final_point: x,
    })
}

fn query<'a>(
    p: &'a ProblemInstance,
    i: usize,
    x: &'a [f64],
    gamma: f64,
) -> Result<ProxQuery<'a>, StepFailure> {
    ProxQuery::new(p, i, x, gamma).map_err(|e| match e {
        ProxError::Problem(ProblemError::NonFinite) => StepFailure::Diverged,
        e => StepFailure::Prox(e),
    })
}

/// Stochastic proximal point method: `x_{k+1} = prox_{γ f_{ξ_k}}(x_k)`.
pub fn sppm(p: &ProblemInstance, cfg: &RunConfig) -> Result<Trajectory, RunError> {
    if cfg.inner.mode != InnerMode::Exact {
        return Err(RunError::RequiresExactInner);
    }
    drive(p, cfg, |x, i, next| {
        let q = query(p, i, x, cfg.gamma)?;
        let res = prox_oracle(&q).map_err(StepFailure::Prox)?;
        next.copy_from_slice(&res.point);
        Ok(StepOutput {
            inner_iterations: res.inner_iterations_used,
            psi_grad_sq: res.final_psi_grad_sq,
            realized_c: None,
        })
    })
}

/// SPPM with an approximate prox: `x̂_k ≈ prox_{γ f_{ξ_k}}(x_k)` from the
/// configured inner solver, then `x_{k+1} = x_k − γ∇f_{ξ_k}(x̂_k)`.
///
/// Inner-solver divergence ends the run with [`Outcome::Diverged`].
pub fn sppm_inexact(p: &ProblemInstance, cfg: &RunConfig) -> Result<Trajectory, RunError> {
    let mut grad = vec![0.0; p.d()];
    drive(p, cfg, |x, i, next| {
        let q = query(p, i, x, cfg.gamma)?;
        let res = match prox_inexact(&q, &cfg.inner) {
            Ok(r) => r,
            Err(ProxError::InnerDivergence { .. }) => return Err(StepFailure::Diverged),
            Err(e) => return Err(StepFailure::Prox(e)),
        };
        p.component_gradient(i, &res.point, &mut grad);
        linalg::step_into(next, x, cfg.gamma, &grad);
        let realized_c = if cfg.measure_inexactness {
            let exact = prox_oracle(&q).map_err(StepFailure::Prox)?;
            prox::realized_inexactness(res.final_psi_grad_sq, cfg.gamma, x, &exact.point)
        } else {
            None
        };
        Ok(StepOutput {
            inner_iterations: res.inner_iterations_used,
            psi_grad_sq: res.final_psi_grad_sq,
            realized_c,
        })
    })
}

/// Baseline `x_{k+1} = x_k − γ∇f_{ξ_k}(x_k)`.
pub fn sgd(p: &ProblemInstance, cfg: &RunConfig) -> Result<Trajectory, RunError> {
    let mut grad = vec![0.0; p.d()];
    drive(p, cfg, |x, i, next| {
        p.component_gradient(i, x, &mut grad);
        linalg::step_into(next, x, cfg.gamma, &grad);
        Ok(StepOutput { inner_iterations: 0, psi_grad_sq: 0.0, realized_c: None })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformIterate {
    pub index: usize,
    pub gap: f64,
}

/// Draws one of the outer iterates `x_0, …, x_{m−1}` uniformly at random
/// (`m` = steps taken, at least 1) and returns its optimality gap.
pub fn select_uniform_iterate(t: &Trajectory, seed: u64) -> UniformIterate {
    let m = t.steps().max(1);
    let index = rng::stream(seed, Stream::Selection).random_range(0..m);
    UniformIterate { index, gap: t.records[index].gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::point_at_distance;

    fn quadratic_1d() -> ProblemInstance {
        ProblemInstance::shifted_quadratic_with_shifts(1, vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn sppm_on_quadratic_halves_each_step() {
        let p = quadratic_1d();
        let t = sppm(&p, &RunConfig::new(1.0, vec![2.0], 2, 0)).unwrap();
        assert_eq!(t.records.len(), 3);
        assert_eq!(t.records[1].dist_sq, 1.0);
        assert_eq!(t.records[2].dist_sq, 0.25);
        assert_eq!(t.final_point, vec![0.5]);
    }

    #[test]
    fn sgd_on_quadratic_lands_on_minimizer() {
        let p = quadratic_1d();
        let t = sgd(&p, &RunConfig::new(1.0, vec![2.0], 1, 0)).unwrap();
        assert_eq!(t.final_point, vec![0.0]);
    }

    #[test]
    fn start_at_minimizer_stays_there() {
        let p = ProblemInstance::power_norm(20, 4, 3, 1).unwrap();
        let cfg = RunConfig::new(5.0, vec![0.0; 4], 10, 3);
        for t in [
            sppm(&p, &cfg).unwrap(),
            sgd(&p, &cfg).unwrap(),
            sppm_inexact(&p, &cfg.clone().with_inner(InnerSolverConfig::tolerance(1e-12)))
                .unwrap(),
        ] {
            assert_eq!(t.records.len(), 11);
            assert!(t.records.iter().all(|r| r.dist_sq == 0.0 && r.gap == 0.0));
            assert_eq!(t.outcome, Outcome::Converged { at: 0 });
            assert_eq!(select_uniform_iterate(&t, 5).gap, 0.0);
        }
    }

    #[test]
    fn sppm_rejects_inexact_inner() {
        let p = quadratic_1d();
        let cfg = RunConfig::new(1.0, vec![1.0], 3, 0).with_inner(InnerSolverConfig::fixed(2));
        assert_eq!(sppm(&p, &cfg).unwrap_err(), RunError::RequiresExactInner);
    }

    #[test]
    fn sgd_blows_up_on_quartic_with_large_step() {
        let p = ProblemInstance::power_norm(10, 3, 2, 4).unwrap();
        let x0 = point_at_distance(&[0.0; 3], 10.0, 1);
        let t = sgd(&p, &RunConfig::new(100.0, x0, 50, 2)).unwrap();
        assert!(t.is_diverged());
    }

    #[test]
    fn sppm_stable_where_sgd_blows_up() {
        let p = ProblemInstance::power_norm(10, 3, 2, 4).unwrap();
        let x0 = point_at_distance(&[0.0; 3], 10.0, 1);
        let t = sppm(&p, &RunConfig::new(100.0, x0, 50, 2)).unwrap();
        assert!(!t.is_diverged());
        assert!(t.final_dist_sq() < t.initial_dist_sq());
    }

    #[test]
    fn exact_inner_mode_reproduces_sppm() {
        let p = ProblemInstance::power_norm(30, 5, 2, 9).unwrap();
        let x0 = point_at_distance(&[0.0; 5], 2.0, 4);
        let cfg = RunConfig::new(3.0, x0, 40, 8);
        let a = sppm(&p, &cfg).unwrap();
        let b = sppm_inexact(&p, &cfg).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert!((ra.dist_sq - rb.dist_sq).abs() <= 1e-9);
        }
        for (xa, xb) in a.final_point.iter().zip(&b.final_point) {
            assert!((xa - xb).abs() <= 1e-9);
        }
    }

    #[test]
    fn stop_on_convergence_truncates() {
        let p = quadratic_1d();
        let mut cfg = RunConfig::new(1.0, vec![1.0], 1000, 0);
        cfg.rtol = 1e-6;
        cfg.stop_on_convergence = true;
        let t = sppm(&p, &cfg).unwrap();
        // (1/4)^k ≤ 1e-6 first at k = 10.
        assert_eq!(t.outcome, Outcome::Converged { at: 10 });
        assert_eq!(t.records.len(), 11);
    }

    #[test]
    fn single_step_selects_first_iterate() {
        let p = quadratic_1d();
        let t = sppm(&p, &RunConfig::new(1.0, vec![2.0], 1, 0)).unwrap();
        for seed in 0..20 {
            let u = select_uniform_iterate(&t, seed);
            assert_eq!(u.index, 0);
            assert_eq!(u.gap, 2.0);
        }
    }

    #[test]
    fn deterministic_given_seeds() {
        let p = ProblemInstance::power_norm(100, 6, 2, 1).unwrap();
        let x0 = point_at_distance(&[0.0; 6], 3.0, 2);
        let cfg = RunConfig::new(2.0, x0, 60, 5).with_inner(InnerSolverConfig::fixed(3));
        assert_eq!(sppm_inexact(&p, &cfg).unwrap(), sppm_inexact(&p, &cfg).unwrap());
    }
}
