//! Empirical checks of a configuration against the theory.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sppm_core::rng::{point_in_ball, stream, Stream};
use sppm_core::theory::{
    bound_curve, check_bound_dominance, check_monotonicity, check_phi_descent,
    estimate_delta_star, estimate_l0l1, estimate_sigma_star, phi_eval, BoundKind, BoundParams,
    MeanTrajectory, PhiSpec, TheoryError,
};
use sppm_core::{FiniteSum, Trajectory};

use crate::config::{Algorithm, ExperimentConfig, InnerModeName, OneOrMany};
use crate::error::{HarnessError, Result};
use crate::runner::{execute_on, write_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub family: String,
    pub check: String,
    pub status: Status,
    pub message: String,
    pub values: Map<String, Value>,
}

impl CheckRecord {
    fn new(family: &str, check: &str, status: Status, message: impl Into<String>) -> Self {
        Self {
            family: family.to_owned(),
            check: check.to_owned(),
            status,
            message: message.into(),
            values: Map::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.values.insert(key.to_owned(), value);
        self
    }
}

pub struct VerifyReport {
    pub records: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }
}

/// Runs every check for every family and writes `verify.jsonl` plus one
/// `bound_<family>_<kind>.csv` per evaluated bound into `dir`.
pub fn verify(cfg: &ExperimentConfig, dir: &Path) -> Result<VerifyReport> {
    fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let per_s = matches!(cfg.problem.s, Some(OneOrMany::Many(_)));
    let mut records = Vec::new();
    for s in cfg.s_values() {
        let family = match (per_s, s) {
            (true, Some(s)) => format!("{}_s{s}", cfg.name()),
            _ => cfg.name().to_owned(),
        };
        records.extend(verify_family(cfg, &family, s, dir)?);
    }
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r).expect("records serialize"));
        text.push('\n');
    }
    write_file(&dir.join("verify.jsonl"), text.as_bytes())?;
    Ok(VerifyReport { records })
}

fn verify_family(
    cfg: &ExperimentConfig,
    family: &str,
    s: Option<u32>,
    dir: &Path,
) -> Result<Vec<CheckRecord>> {
    let problem = cfg.problem_spec(s).build().map_err(|e| HarnessError::Config {
        path: cfg.name().into(),
        message: format!("problem: {e}"),
    })?;
    let x_star = problem.minimizer().to_vec();
    let constants = problem.known_constants();
    let v = &cfg.verify;
    let r0 = cfg.run.x0_norm;
    let radius = r0.max(1.0);
    let mut out = Vec::new();

    let inexact = cfg.run.algorithm == Algorithm::SppmInexact && cfg.inner.mode != InnerModeName::Exact;
    let runs: Vec<_> = cfg
        .experiment
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut spec = cfg.base_spec(s, seed);
            spec.run.measure_inexactness |= inexact;
            execute_on(&problem, &spec)
        })
        .collect();
    let failed: Vec<String> = runs.iter().filter_map(|r| r.result.as_ref().err().cloned()).collect();
    if !failed.is_empty() {
        out.push(CheckRecord::new(family, "runs", Status::Fail, failed.join("; ")));
    }
    let trajs: Vec<Trajectory> = runs.into_iter().filter_map(|r| r.result.ok()).collect();

    // σ*² against its closed form.
    let sigma = estimate_sigma_star(&problem, &x_star);
    let known = constants.sigma_star_sq.unwrap_or(f64::NAN);
    let status = if (sigma - known).abs() <= 1e-12 * (1.0 + known.abs()) { Status::Pass } else { Status::Fail };
    out.push(
        CheckRecord::new(family, "sigma_star", status, format!("sigma*^2 = {sigma:e} (closed form {known:e})"))
            .with("estimate", json!(sigma))
            .with("closed_form", json!(known)),
    );

    let delta = estimate_delta_star(&problem, &x_star, v.delta_points, radius, v.seed);
    out.push(
        CheckRecord::new(family, "delta_star", Status::Info, format!("delta* ~ {delta:e} on radius {radius}"))
            .with("estimate", json!(delta)),
    );

    let fit = estimate_l0l1(&problem, v.pairs, radius, &x_star, v.seed);
    let status = if fit.residual_violation == 0.0 { Status::Pass } else { Status::Fail };
    out.push(
        CheckRecord::new(
            family,
            "l0l1_fit",
            status,
            format!(
                "L0 = {}, L1 = {} on {} pairs (residual violation {:e})",
                fit.l0, fit.l1, fit.pairs, fit.residual_violation
            ),
        )
        .with("l0", json!(fit.l0))
        .with("l1", json!(fit.l1))
        .with("residual_violation", json!(fit.residual_violation)),
    );
    let phi = PhiSpec::ExpL0L1 { l0: fit.l0, l1: fit.l1 };

    let violations = phi_descent_violations(&problem, &phi, v.pairs, radius, &x_star, v.seed);
    out.push(
        CheckRecord::new(
            family,
            "phi_descent",
            if violations == 0 { Status::Pass } else { Status::Fail },
            format!("{violations} of {} pairs violate the descent inequality", v.pairs),
        )
        .with("violations", json!(violations)),
    );

    let monotone_applies = problem.is_interpolating()
        && cfg.run.algorithm != Algorithm::Sgd
        && cfg.inner.mode != InnerModeName::Fixed;
    if monotone_applies {
        let bad: usize = trajs.iter().map(|t| check_monotonicity(t).violations.len()).sum();
        out.push(
            CheckRecord::new(
                family,
                "monotonicity",
                if bad == 0 { Status::Pass } else { Status::Fail },
                format!("{bad} violations over {} runs", trajs.len()),
            )
            .with("violations", json!(bad)),
        );
    } else {
        out.push(CheckRecord::new(
            family,
            "monotonicity",
            Status::Skipped,
            "applies to exact SPPM on interpolating problems",
        ));
    }

    out.extend(bound_checks(cfg, family, &problem, &trajs, &phi, delta, sigma, inexact, dir)?);
    Ok(out)
}

fn phi_descent_violations<P: FiniteSum>(
    p: &P,
    phi: &PhiSpec,
    pairs: usize,
    radius: f64,
    center: &[f64],
    seed: u64,
) -> usize {
    let mut rng = stream(seed, Stream::Selection);
    (0..pairs)
        .filter(|_| {
            let i = rng.random_range(0..p.num_components());
            let x = point_in_ball(&mut rng, center, radius);
            let y = point_in_ball(&mut rng, center, radius);
            !check_phi_descent(p, phi, i, &x, &y).is_ok_and(|c| c.holds)
        })
        .count()
}

#[allow(clippy::too_many_arguments)]
fn bound_checks(
    cfg: &ExperimentConfig,
    family: &str,
    problem: &sppm_core::ProblemInstance,
    trajs: &[Trajectory],
    phi: &PhiSpec,
    delta: f64,
    sigma: f64,
    inexact: bool,
    dir: &Path,
) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    if cfg.run.algorithm == Algorithm::Sgd {
        out.push(CheckRecord::new(family, "bounds", Status::Skipped, "bounds describe SPPM runs"));
        return Ok(out);
    }
    let mu = problem.known_constants().mu;
    let kinds: Vec<BoundKind> = match (problem.is_interpolating(), mu, inexact) {
        (true, None, false) => vec![BoundKind::ConvexExact],
        (true, None, true) => vec![BoundKind::ConvexInexact],
        (true, Some(_), false) => vec![
            BoundKind::ConvexExact,
            BoundKind::StronglyConvexExact,
            BoundKind::SimilarityExact,
        ],
        (true, Some(_), true) => vec![
            BoundKind::ConvexInexact,
            BoundKind::StronglyConvexInexact,
            BoundKind::SimilarityInexact,
        ],
        (false, Some(_), false) => vec![BoundKind::NeighborhoodExact],
        (false, Some(_), true) => vec![BoundKind::NeighborhoodInexact],
        (false, None, _) => Vec::new(),
    };
    if kinds.is_empty() || trajs.is_empty() {
        out.push(CheckRecord::new(family, "bounds", Status::Skipped, "no bound applies"));
        return Ok(out);
    }
    let gamma = cfg.run.gamma;
    let r0_sq = trajs.iter().map(|t| t.initial_dist_sq()).fold(0.0, f64::max);
    let r0 = r0_sq.sqrt();
    let c = if inexact {
        trajs.iter().filter_map(|t| t.measured_c).fold(0.0, f64::max)
    } else {
        0.0
    };
    let phi_value = phi_eval(phi, r0, r0 / gamma).unwrap_or(f64::INFINITY);
    let params = BoundParams {
        gamma,
        mu: mu.unwrap_or(0.0),
        delta_star: delta,
        sigma_star_sq: sigma,
        c,
        r0_sq,
        phi_value,
    };
    let diverged = trajs.iter().any(Trajectory::is_diverged);
    let mean = MeanTrajectory::from_runs(trajs);

    for kind in kinds {
        let check = format!("bound_{}", kind.name());
        let curve = match bound_curve(kind, params) {
            Ok(curve) => curve,
            Err(TheoryError::Precondition { requirement, .. }) => {
                out.push(CheckRecord::new(
                    family,
                    &check,
                    Status::Skipped,
                    format!("precondition not met, bound skipped: {requirement}"),
                ));
                continue;
            }
            Err(e) => {
                out.push(CheckRecord::new(family, &check, Status::Fail, e.to_string()));
                continue;
            }
        };
        if diverged {
            out.push(CheckRecord::new(family, &check, Status::Fail, "a run diverged"));
            continue;
        }
        let mean = match &mean {
            Ok(m) => m,
            Err(e) => {
                out.push(CheckRecord::new(
                    family,
                    &check,
                    Status::Skipped,
                    format!("{e}; disable run.stop_on_convergence to compare bounds"),
                ));
                continue;
            }
        };
        let report = check_bound_dominance(mean, &curve, cfg.verify.slack)
            .map_err(|e| HarnessError::Verification(e.to_string()))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "bound", "empirical", "ratio"]).expect("in-memory write");
        for row in &report.rows {
            w.write_record([
                row.k.to_string(),
                format!("{:e}", row.bound),
                format!("{:e}", row.empirical),
                format!("{:e}", row.ratio),
            ])
            .expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        write_file(&dir.join(format!("bound_{family}_{}.csv", kind.name())), &bytes)?;
        out.push(
            CheckRecord::new(
                family,
                &check,
                if report.holds() { Status::Pass } else { Status::Fail },
                format!(
                    "max empirical/bound ratio {:e} at k={} ({} violations, slack {})",
                    report.max_ratio,
                    report.worst_k,
                    report.violations.len(),
                    cfg.verify.slack
                ),
            )
            .with("max_ratio", json!(report.max_ratio))
            .with("violations", json!(report.violations.len()))
            .with("c", json!(c))
            .with("phi_value", json!(phi_value)),
        );
    }
    Ok(out)
}
