//! Parameter sweeps: every sweep value × every seed, per output family.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sppm_core::{Outcome, ProblemInstance};

use crate::config::{ExperimentConfig, OneOrMany, RunSpec};
use crate::error::{HarnessError, Result};
use crate::plot::{plot_family, AGGREGATE_COLUMNS, SUMMARY_COLUMNS};
use crate::runner::{csv_name, execute_on, trajectory_csv, update_manifest, write_file, Executed, ManifestEntry};

pub struct Cell {
    pub value: f64,
    /// One entry per seed, in the order of `experiment.seeds`.
    pub runs: Vec<Executed>,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}", self.value)
    }

    fn count(&self, pred: impl Fn(&Outcome) -> bool) -> usize {
        self.runs
            .iter()
            .filter(|r| r.result.as_ref().is_ok_and(|t| pred(&t.outcome)))
            .count()
    }

    pub fn converged(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Converged { .. }))
    }

    pub fn completed(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Completed))
    }

    pub fn diverged(&self) -> usize {
        self.count(|o| matches!(o, Outcome::Diverged { .. }))
    }

    pub fn failed(&self) -> usize {
        self.runs.iter().filter(|r| r.result.is_err()).count()
    }

    /// Median over the seeds that reached the threshold.
    pub fn median_iterations_to_rtol(&self) -> Option<f64> {
        let mut hits: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.result.as_ref().ok()?.iterations_to(r.spec.rtol))
            .map(|k| k as f64)
            .collect();
        median(&mut hits)
    }

    pub fn mean_inner_per_step(&self) -> Option<f64> {
        let (inner, steps) = self
            .runs
            .iter()
            .filter_map(|r| r.result.as_ref().ok())
            .fold((0usize, 0usize), |(i, s), t| (i + t.total_inner_iterations(), s + t.steps()));
        (steps > 0).then(|| inner as f64 / steps as f64)
    }

    /// Mean and median `dist_sq` at each `k` over the runs still going at `k`.
    pub fn aggregate(&self) -> Vec<(usize, f64, f64)> {
        let trajs: Vec<_> = self.runs.iter().filter_map(|r| r.result.as_ref().ok()).collect();
        let horizon = trajs.iter().map(|t| t.records.len()).max().unwrap_or(0);
        (0..horizon)
            .map(|k| {
                let mut v: Vec<f64> = trajs
                    .iter()
                    .filter_map(|t| t.records.get(k).map(|r| r.dist_sq))
                    .collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                (k, mean, median(&mut v).unwrap_or(f64::NAN))
            })
            .collect()
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub struct Family {
    pub name: String,
    pub s: Option<u32>,
    pub cells: Vec<Cell>,
}

pub struct SweepResult {
    pub param: &'static str,
    pub families: Vec<Family>,
}

fn family_names(cfg: &ExperimentConfig) -> Vec<(String, Option<u32>)> {
    let per_s = matches!(cfg.problem.s, Some(OneOrMany::Many(_)));
    cfg.s_values()
        .into_iter()
        .map(|s| match (per_s, s) {
            (true, Some(s)) => (format!("{}_s{s}", cfg.name()), Some(s)),
            _ => (cfg.name().to_owned(), s),
        })
        .collect()
}

/// Runs the full grid. Run failures are kept per cell; only an invalid
/// problem declaration aborts the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| HarnessError::Config {
        path: PathBuf::from(cfg.name()),
        message: "sweep requires a [sweep] section".into(),
    })?;
    let families = family_names(cfg);
    let mut problems = Vec::new();
    for (_, s) in &families {
        let p = cfg.problem_spec(*s).build().map_err(|e| HarnessError::Config {
            path: PathBuf::from(cfg.name()),
            message: format!("problem: {e}"),
        })?;
        problems.push(p);
    }
    let jobs: Vec<(usize, usize, RunSpec)> = families
        .iter()
        .enumerate()
        .flat_map(|(f, (_, s))| {
            sweep.values.iter().enumerate().flat_map(move |(c, &v)| {
                cfg.experiment.seeds.iter().map(move |&seed| (f, c, cfg.cell_spec(*s, v, seed)))
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.workers)
        .build()
        .expect("thread pool");
    let problems: &[ProblemInstance] = &problems;
    let mut results: Vec<(usize, usize, Executed)> = pool.install(|| {
        jobs.par_iter()
            .map(|(f, c, spec)| (*f, *c, execute_on(&problems[*f], spec)))
            .collect()
    });

    let mut out: Vec<Family> = families
        .into_iter()
        .map(|(name, s)| Family {
            name,
            s,
            cells: sweep.values.iter().map(|&value| Cell { value, runs: Vec::new() }).collect(),
        })
        .collect();
    for (f, c, ex) in results.drain(..) {
        out[f].cells[c].runs.push(ex);
    }
    Ok(SweepResult { param: sweep.param.name(), families: out })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:e}"))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes run CSVs, the manifest, and per family the aggregate and summary
/// CSVs plus the SVG rendered from them. Returns the written SVG paths.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let mut entries = Vec::new();
    let mut svgs = Vec::new();
    for family in &result.families {
        for cell in &family.cells {
            for ex in &cell.runs {
                if let Ok(t) = &ex.result {
                    write_file(&dir.join(csv_name(&ex.id)), &trajectory_csv(t))?;
                }
                entries.push(ManifestEntry::new(ex));
            }
        }
        let aggregate = csv_bytes(
            &AGGREGATE_COLUMNS,
            family.cells.iter().flat_map(|cell| {
                let label = cell.label();
                cell.aggregate().into_iter().map(move |(k, mean, med)| {
                    vec![k.to_string(), label.clone(), format!("{mean:e}"), format!("{med:e}")]
                })
            }),
        );
        let summary = csv_bytes(
            &SUMMARY_COLUMNS,
            family.cells.iter().map(|cell| {
                let final_mean = cell.aggregate().last().map(|r| r.1);
                vec![
                    result.param.to_owned(),
                    cell.label(),
                    cell.runs.len().to_string(),
                    cell.converged().to_string(),
                    cell.completed().to_string(),
                    cell.diverged().to_string(),
                    cell.failed().to_string(),
                    opt(cell.median_iterations_to_rtol()),
                    opt(cell.mean_inner_per_step()),
                    opt(final_mean),
                ]
            }),
        );
        let agg_path = dir.join(format!("aggregate_{}.csv", family.name));
        let sum_path = dir.join(format!("summary_{}.csv", family.name));
        write_file(&agg_path, &aggregate)?;
        write_file(&sum_path, &summary)?;
        let svg = plot_family(&agg_path, Some(&sum_path))?;
        let svg_path = dir.join(format!("{}.svg", family.name));
        write_file(&svg_path, svg.as_bytes())?;
        svgs.push(svg_path);
    }
    update_manifest(dir, &entries)?;
    Ok(svgs)
}
