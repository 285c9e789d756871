//! Experiment configuration files.
//!
//! A config is a TOML document with the sections `[problem]`, `[run]`,
//! `[inner]`, `[sweep]`, `[experiment]` and `[verify]`; see
//! `configs/README.md` for the schema. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sppm_core::{InnerMode, InnerSolverConfig, ProblemInstance, ProblemKind, StepPolicy};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Used to name output families; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub inner: InnerSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    pub n: usize,
    pub d: usize,
    /// Power parameter; a list produces one output family per value.
    #[serde(default)]
    pub s: Option<OneOrMany<u32>>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Half-width scale of the shifts of a shifted quadratic.
    #[serde(default)]
    pub spread: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sppm,
    SppmInexact,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub algorithm: Algorithm,
    pub gamma: f64,
    /// Distance of the start point from the minimizer.
    pub x0_norm: f64,
    pub iterations: usize,
    pub divergence_threshold: f64,
    pub stop_on_convergence: bool,
    pub measure_inexactness: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Sppm,
            gamma: 1.0,
            x0_norm: 10.0,
            iterations: 1000,
            divergence_threshold: 1e8,
            stop_on_convergence: false,
            measure_inexactness: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerModeName {
    Exact,
    Fixed,
    Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepName {
    Backtracking,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InnerSection {
    pub mode: InnerModeName,
    /// Inner step count `T` in `fixed` mode.
    pub iterations: usize,
    /// Threshold on `‖∇Ψ‖²` in `tolerance` mode.
    pub eps: f64,
    pub max_iterations: usize,
    pub step: StepName,
    pub shrink: f64,
    pub slope: f64,
    pub fixed_step: f64,
}

impl Default for InnerSection {
    fn default() -> Self {
        Self {
            mode: InnerModeName::Tolerance,
            iterations: 10,
            eps: 1e-12,
            max_iterations: 100_000,
            step: StepName::Backtracking,
            shrink: 0.5,
            slope: 1e-4,
            fixed_step: 0.01,
        }
    }
}

impl InnerSection {
    pub fn solver_config(&self) -> InnerSolverConfig {
        let mode = match self.mode {
            InnerModeName::Exact => InnerMode::Exact,
            InnerModeName::Fixed => InnerMode::FixedIterations(self.iterations),
            InnerModeName::Tolerance => InnerMode::GradientTolerance(self.eps),
        };
        let step_policy = match self.step {
            StepName::Backtracking => {
                StepPolicy::Backtracking { shrink: self.shrink, slope: self.slope }
            }
            StepName::Fixed => StepPolicy::Fixed(self.fixed_step),
        };
        InnerSolverConfig { mode, max_iterations: self.max_iterations, step_policy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Gamma,
    X0Norm,
    InnerIterations,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::X0Norm => "x0_norm",
            SweepParam::InnerIterations => "inner_iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
    pub rtol: f64,
    pub workers: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { seeds: vec![0], output_dir: None, rtol: 1e-10, workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Multiplicative slack on bound dominance.
    pub slack: f64,
    /// Sampled pairs for the `(L0, L1)` fit and the φ-descent check.
    pub pairs: usize,
    /// Sampled points for the similarity-constant estimate.
    pub delta_points: usize,
    pub seed: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { slack: 1.0, pairs: 2000, delta_points: 200, seed: 0 }
    }
}

/// Command-line overrides applied after parsing and before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub rtol: Option<f64>,
}

impl ExperimentConfig {
    /// Parses a config. Without an `[inner]` table, `sppm` runs use the
    /// exact prox.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let err = |e: toml::de::Error| HarnessError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut cfg: Self = toml::from_str(text).map_err(err)?;
        let table: toml::Table = toml::from_str(text).map_err(err)?;
        if !table.contains_key("inner") && cfg.run.algorithm == Algorithm::Sppm {
            cfg.inner.mode = InnerModeName::Exact;
        }
        Ok(cfg)
    }

    /// Reads, overrides and validates a config file.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
        let mut cfg = Self::from_toml(&text, path)?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        cfg.apply(overrides);
        cfg.validate().map_err(|message| HarnessError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(out) = &overrides.out {
            self.experiment.output_dir = Some(out.clone());
        }
        if let Some(w) = overrides.workers {
            self.experiment.workers = w;
        }
        if let Some(r) = overrides.rtol {
            self.experiment.rtol = r;
        }
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.experiment
            .output_dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(self.name()))
    }

    pub fn s_values(&self) -> Vec<Option<u32>> {
        match &self.problem.s {
            None => vec![None],
            Some(s) => s.to_vec().into_iter().map(Some).collect(),
        }
    }

    /// Checks every field; the message names the offending dotted key.
    pub fn validate(&self) -> Result<(), String> {
        let p = &self.problem;
        if p.n == 0 {
            return Err("problem.n must be at least 1".into());
        }
        if p.d == 0 {
            return Err("problem.d must be at least 1".into());
        }
        let needs_s = matches!(p.kind, ProblemKind::PowerNorm | ProblemKind::RegularizedPowerNorm);
        match (&p.s, needs_s) {
            (None, true) => return Err("problem.s is required for this problem kind".into()),
            (Some(_), false) => return Err("problem.s only applies to power-norm problems".into()),
            (Some(s), true) => {
                let s = s.to_vec();
                if s.is_empty() {
                    return Err("problem.s must not be an empty list".into());
                }
                if s.iter().any(|&v| v < 2) {
                    return Err("problem.s values must be at least 2".into());
                }
            }
            (None, false) => {}
        }
        match p.kind {
            ProblemKind::RegularizedPowerNorm => {
                if !p.lambda.is_some_and(|l| l >= 0.0 && l.is_finite()) {
                    return Err("problem.lambda must be a finite nonnegative number".into());
                }
                if p.n != p.d {
                    return Err("problem.n must equal problem.d for regularized_power_norm".into());
                }
            }
            ProblemKind::ShiftedQuadratic => {
                if !p.spread.unwrap_or(1.0).is_finite() || p.spread.unwrap_or(1.0) < 0.0 {
                    return Err("problem.spread must be a finite nonnegative number".into());
                }
            }
            ProblemKind::PowerNorm => {}
        }
        if p.lambda.is_some() && p.kind != ProblemKind::RegularizedPowerNorm {
            return Err("problem.lambda only applies to regularized_power_norm".into());
        }
        if p.spread.is_some() && p.kind != ProblemKind::ShiftedQuadratic {
            return Err("problem.spread only applies to shifted_quadratic".into());
        }

        let r = &self.run;
        check_gamma("run.gamma", r.gamma)?;
        check_x0_norm("run.x0_norm", r.x0_norm)?;
        if r.iterations == 0 {
            return Err("run.iterations must be at least 1".into());
        }
        if !(r.divergence_threshold > 0.0) {
            return Err("run.divergence_threshold must be positive".into());
        }
        if r.algorithm == Algorithm::Sppm && self.inner.mode != InnerModeName::Exact {
            return Err("run.algorithm = \"sppm\" requires inner.mode = \"exact\"".into());
        }

        let i = &self.inner;
        if i.mode == InnerModeName::Fixed && i.iterations == 0 {
            return Err("inner.iterations must be at least 1".into());
        }
        if i.mode == InnerModeName::Tolerance && !(i.eps > 0.0 && i.eps.is_finite()) {
            return Err("inner.eps must be positive".into());
        }
        if i.max_iterations == 0 {
            return Err("inner.max_iterations must be at least 1".into());
        }
        if !(i.shrink > 0.0 && i.shrink < 1.0) {
            return Err("inner.shrink must lie in (0, 1)".into());
        }
        if !(i.slope > 0.0 && i.slope < 1.0) {
            return Err("inner.slope must lie in (0, 1)".into());
        }
        if !(i.fixed_step > 0.0 && i.fixed_step.is_finite()) {
            return Err("inner.fixed_step must be positive".into());
        }

        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err("sweep.values must not be empty".into());
            }
            for &v in &sw.values {
                match sw.param {
                    SweepParam::Gamma => check_gamma("sweep.values", v)?,
                    SweepParam::X0Norm => check_x0_norm("sweep.values", v)?,
                    SweepParam::InnerIterations => {
                        if !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
                            return Err(format!(
                                "sweep.values: inner iteration counts must be integers >= 1, got {v}"
                            ));
                        }
                        if self.inner.mode != InnerModeName::Fixed {
                            return Err(
                                "sweep.param = \"inner_iterations\" requires inner.mode = \"fixed\""
                                    .into(),
                            );
                        }
                    }
                }
            }
        }

        let e = &self.experiment;
        if e.seeds.is_empty() {
            return Err("experiment.seeds must not be empty".into());
        }
        if !(e.rtol > 0.0 && e.rtol < 1.0) {
            return Err("experiment.rtol must lie in (0, 1)".into());
        }
        if e.workers == 0 {
            return Err("experiment.workers must be at least 1".into());
        }

        let v = &self.verify;
        if !(v.slack >= 1.0) {
            return Err("verify.slack must be at least 1".into());
        }
        if v.pairs == 0 || v.delta_points == 0 {
            return Err("verify.pairs and verify.delta_points must be at least 1".into());
        }
        Ok(())
    }
}

fn check_gamma(key: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{key}: stepsize must be positive and finite, got {v}"))
    }
}

fn check_x0_norm(key: &str, v: f64) -> Result<(), String> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{key}: start distance must be finite and nonnegative, got {v}"))
    }
}

/// Everything needed to reproduce one run. Serialized into the manifest and
/// hashed into the run's file name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub run: RunSection,
    pub inner: InnerSection,
    pub seed: u64,
    pub rtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    pub d: usize,
    pub s: Option<u32>,
    pub lambda: Option<f64>,
    pub spread: Option<f64>,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<ProblemInstance, sppm_core::ProblemError> {
        let s = self.s.unwrap_or(2);
        match self.kind {
            ProblemKind::PowerNorm => ProblemInstance::power_norm(self.n, self.d, s, self.seed),
            ProblemKind::RegularizedPowerNorm => ProblemInstance::regularized_power_norm(
                self.n,
                self.d,
                s,
                self.lambda.unwrap_or(0.0),
                self.seed,
            ),
            ProblemKind::ShiftedQuadratic => ProblemInstance::shifted_quadratic(
                self.n,
                self.d,
                self.spread.unwrap_or(1.0),
                self.seed,
            ),
        }
    }
}

impl ExperimentConfig {
    pub fn problem_spec(&self, s: Option<u32>) -> ProblemSpec {
        let p = &self.problem;
        ProblemSpec {
            kind: p.kind,
            n: p.n,
            d: p.d,
            s,
            lambda: p.lambda,
            spread: p.spread,
            seed: p.seed,
        }
    }

    /// The base run for power `s` and `seed`, ignoring any sweep.
    pub fn base_spec(&self, s: Option<u32>, seed: u64) -> RunSpec {
        RunSpec {
            problem: self.problem_spec(s),
            run: self.run.clone(),
            inner: self.inner.clone(),
            seed,
            rtol: self.experiment.rtol,
        }
    }

    /// The run for one sweep cell.
    pub fn cell_spec(&self, s: Option<u32>, value: f64, seed: u64) -> RunSpec {
        let mut spec = self.base_spec(s, seed);
        if let Some(sw) = &self.sweep {
            match sw.param {
                SweepParam::Gamma => spec.run.gamma = value,
                SweepParam::X0Norm => spec.run.x0_norm = value,
                SweepParam::InnerIterations => spec.inner.iterations = value as usize,
            }
        }
        spec
    }
}

impl RunSpec {
    /// A config that reproduces exactly this run through `run`.
    pub fn to_config(&self) -> ExperimentConfig {
        let p = &self.problem;
        ExperimentConfig {
            name: None,
            problem: ProblemSection {
                kind: p.kind,
                n: p.n,
                d: p.d,
                s: p.s.map(OneOrMany::One),
                lambda: p.lambda,
                spread: p.spread,
                seed: p.seed,
            },
            run: self.run.clone(),
            inner: self.inner.clone(),
            sweep: None,
            experiment: ExperimentSection {
                seeds: vec![self.seed],
                rtol: self.rtol,
                ..ExperimentSection::default()
            },
            verify: VerifySection::default(),
        }
    }
}
