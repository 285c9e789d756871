//! The four subcommands of the `sppm` binary.

use std::fs;
use std::path::Path;

use crate::config::{ExperimentConfig, OneOrMany, Overrides};
use crate::error::{HarnessError, Result};
use crate::runner::{csv_name, execute, summary_line, trajectory_csv, update_manifest, write_file, ManifestEntry};
use crate::sweep::{run_sweep, write_sweep};
use crate::verify::{verify, Status};

fn config_error(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Config { path: path.to_path_buf(), message: message.into() }
}

/// Executes the single run a config describes.
pub fn cmd_run(path: &Path, overrides: &Overrides) -> Result<()> {
    let cfg = ExperimentConfig::load(path, overrides)?;
    if cfg.sweep.is_some() {
        return Err(config_error(path, "run takes a config without [sweep]; use `sppm sweep`"));
    }
    if matches!(&cfg.problem.s, Some(OneOrMany::Many(v)) if v.len() != 1) {
        return Err(config_error(path, "problem.s: run takes a single power; use `sppm sweep`"));
    }
    if cfg.experiment.seeds.len() != 1 {
        return Err(config_error(path, "experiment.seeds: run takes exactly one seed"));
    }
    let spec = cfg.base_spec(cfg.s_values()[0], cfg.experiment.seeds[0]);
    let ex = execute(&spec).map_err(|e| config_error(path, format!("problem: {e}")))?;
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).map_err(HarnessError::io(&dir))?;
    if let Ok(t) = &ex.result {
        write_file(&dir.join(csv_name(&ex.id)), &trajectory_csv(t))?;
    }
    update_manifest(&dir, &[ManifestEntry::new(&ex)])?;
    println!("{}", summary_line(&ex));
    Ok(())
}

pub fn cmd_sweep(path: &Path, overrides: &Overrides) -> Result<()> {
    let cfg = ExperimentConfig::load(path, overrides)?;
    if cfg.sweep.is_none() {
        return Err(config_error(path, "sweep requires a [sweep] section"));
    }
    let result = run_sweep(&cfg)?;
    let dir = cfg.output_dir();
    let svgs = write_sweep(&result, &dir)?;
    for family in &result.families {
        for cell in &family.cells {
            let iters = cell
                .median_iterations_to_rtol()
                .map_or("-".to_owned(), |k| k.to_string());
            println!(
                "{} {}={}: converged {}, completed {}, diverged {}, failed {}, median iterations to rtol {}",
                family.name,
                result.param,
                cell.label(),
                cell.converged(),
                cell.completed(),
                cell.diverged(),
                cell.failed(),
                iters
            );
        }
    }
    for svg in svgs {
        println!("wrote {}", svg.display());
    }
    Ok(())
}

pub fn cmd_verify(path: &Path, overrides: &Overrides) -> Result<()> {
    let cfg = ExperimentConfig::load(path, overrides)?;
    let dir = cfg.output_dir();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.workers)
        .build()
        .expect("thread pool");
    let report = pool.install(|| verify(&cfg, &dir))?;
    for r in &report.records {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Info => "INFO",
        };
        println!("[{tag}] {} {}: {}", r.family, r.check, r.message);
    }
    match report.failures() {
        0 => Ok(()),
        n => Err(HarnessError::Verification(format!("{n} check(s) failed"))),
    }
}

pub fn cmd_plot(dir: &Path) -> Result<()> {
    for svg in crate::plot::plot_dir(dir)? {
        println!("wrote {}", svg.display());
    }
    Ok(())
}
