//! Experiment harness for `sppm-core`: config files, single runs, sweeps,
//! verification against the theory, and SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod runner;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, Overrides, RunSpec};
pub use error::{HarnessError, Result};
