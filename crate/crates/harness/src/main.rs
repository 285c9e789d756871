use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sppm_harness::commands::{cmd_plot, cmd_run, cmd_sweep, cmd_verify};
use sppm_harness::Overrides;

/// Stochastic proximal point experiments.
#[derive(Parser)]
#[command(name = "sppm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the single run described by a config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every sweep value for every seed and plot the results.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check runs and constants of a config against the theory.
    Verify {
        config: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Regenerate SVG plots from the CSV files in a directory.
    Plot { dir: PathBuf },
}

#[derive(Args)]
struct Opts {
    /// Output directory, overriding experiment.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, overriding experiment.workers.
    #[arg(long)]
    workers: Option<usize>,
    /// Convergence threshold on dist_sq / dist_sq(0), overriding experiment.rtol.
    #[arg(long)]
    rtol: Option<f64>,
}

impl From<Opts> for Overrides {
    fn from(o: Opts) -> Self {
        Overrides { out: o.out, workers: o.workers, rtol: o.rtol }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, opts } => cmd_run(&config, &opts.into()),
        Command::Sweep { config, opts } => cmd_sweep(&config, &opts.into()),
        Command::Verify { config, opts } => cmd_verify(&config, &opts.into()),
        Command::Plot { dir } => cmd_plot(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
