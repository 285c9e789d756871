//! Executes single runs and serializes them.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sppm_core::problems::ProblemRecord;
use sppm_core::rng::point_at_distance;
use sppm_core::{sgd, sppm, sppm_inexact, Outcome, ProblemInstance, RunConfig, Trajectory};

use crate::config::{Algorithm, RunSpec};
use crate::error::{HarnessError, Result};

pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "k",
    "dist_sq",
    "gap",
    "component",
    "inner_iterations",
    "psi_grad_sq",
    "step_norm_sq",
];

/// First 16 hex digits of the SHA-256 of the spec's JSON encoding.
pub fn run_id(spec: &RunSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("run specs serialize");
    let digest = Sha256::digest(&bytes);
    hex::encode(&digest[..8])
}

pub fn csv_name(id: &str) -> String {
    format!("run_{id}.csv")
}

pub fn run_config(spec: &RunSpec, x_star: &[f64]) -> RunConfig {
    let x0 = point_at_distance(x_star, spec.run.x0_norm, spec.seed);
    let mut cfg = RunConfig::new(spec.run.gamma, x0, spec.run.iterations, spec.seed)
        .with_inner(spec.inner.solver_config());
    cfg.divergence_threshold = spec.run.divergence_threshold;
    cfg.rtol = spec.rtol;
    cfg.stop_on_convergence = spec.run.stop_on_convergence;
    cfg.measure_inexactness = spec.run.measure_inexactness;
    cfg
}

pub struct Executed {
    pub spec: RunSpec,
    pub id: String,
    pub problem: ProblemRecord,
    pub result: Result<Trajectory, String>,
}

/// Runs `spec`. Errors from the run itself are kept in `result` so that a
/// sweep can record them and carry on.
pub fn execute(spec: &RunSpec) -> std::result::Result<Executed, String> {
    let problem = spec.problem.build().map_err(|e| e.to_string())?;
    Ok(execute_on(&problem, spec))
}

/// Runs `spec` on an already built instance of `spec.problem`.
pub fn execute_on(problem: &ProblemInstance, spec: &RunSpec) -> Executed {
    let cfg = run_config(spec, problem.minimizer());
    let result = match spec.run.algorithm {
        Algorithm::Sppm => sppm(problem, &cfg),
        Algorithm::SppmInexact => sppm_inexact(problem, &cfg),
        Algorithm::Sgd => sgd(problem, &cfg),
    }
    .map_err(|e| e.to_string());
    Executed {
        spec: spec.clone(),
        id: run_id(spec),
        problem: problem.manifest_record(),
        result,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRAJECTORY_COLUMNS).expect("in-memory write");
    for r in &traj.records {
        let step = r.step.as_ref();
        w.write_record([
            r.k.to_string(),
            fmt(r.dist_sq),
            fmt(r.gap),
            step.map_or(String::new(), |s| s.component.to_string()),
            step.map_or(String::new(), |s| s.inner_iterations.to_string()),
            step.map_or(String::new(), |s| fmt(s.psi_grad_sq)),
            step.map_or(String::new(), |s| fmt(s.step_norm_sq)),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// One line of `manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub run_id: String,
    pub csv: Option<String>,
    pub spec: RunSpec,
    pub problem: ProblemRecord,
    pub outcome: Option<Outcome>,
    pub initial_dist_sq: Option<f64>,
    pub final_dist_sq: Option<f64>,
    pub iterations_to_rtol: Option<usize>,
    pub total_inner_iterations: Option<usize>,
    pub measured_c: Option<f64>,
    pub error: Option<String>,
}

impl ManifestEntry {
    pub fn new(ex: &Executed) -> Self {
        let t = ex.result.as_ref().ok();
        Self {
            run_id: ex.id.clone(),
            csv: t.map(|_| csv_name(&ex.id)),
            spec: ex.spec.clone(),
            problem: ex.problem.clone(),
            outcome: t.map(|t| t.outcome),
            initial_dist_sq: t.map(|t| t.initial_dist_sq()),
            final_dist_sq: t.map(|t| t.final_dist_sq()),
            iterations_to_rtol: t.and_then(|t| t.iterations_to(ex.spec.rtol)),
            total_inner_iterations: t.map(|t| t.total_inner_iterations()),
            measured_c: t.and_then(|t| t.measured_c),
            error: ex.result.as_ref().err().cloned(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest entries serialize")
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(HarnessError::io(&tmp))?;
    f.write_all(bytes).map_err(HarnessError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(HarnessError::io(path))
}

/// Adds entries to `dir/manifest.jsonl`, replacing lines with the same run id.
pub fn update_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let path = dir.join("manifest.jsonl");
    let mut lines: Vec<String> = match fs::read_to_string(&path) {
        Ok(text) => text.lines().map(str::to_owned).collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(HarnessError::Io { path, source: e }),
    };
    lines.retain(|line| {
        let id = serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("run_id").and_then(|s| s.as_str()).map(str::to_owned));
        !entries.iter().any(|e| Some(&e.run_id) == id.as_ref())
    });
    lines.extend(entries.iter().map(ManifestEntry::to_line));
    let mut text = lines.join("\n");
    text.push('\n');
    write_file(&path, text.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join("manifest.jsonl");
    let text = fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| HarnessError::input(&path, format!("bad manifest line: {e}")))
        })
        .collect()
}

/// Human-readable one-line summary of a run.
pub fn summary_line(ex: &Executed) -> String {
    match &ex.result {
        Ok(t) => {
            let outcome = match t.outcome {
                Outcome::Converged { at } => format!("converged at k={at}"),
                Outcome::Completed => "completed".to_owned(),
                Outcome::Diverged { at } => format!("diverged at k={at}"),
            };
            format!(
                "run {} seed={}: {outcome}, final dist_sq = {:e}, total inner iterations = {}",
                ex.id,
                ex.spec.seed,
                t.final_dist_sq(),
                t.total_inner_iterations()
            )
        }
        Err(e) => format!("run {} seed={}: failed: {e}", ex.id, ex.spec.seed),
    }
}
