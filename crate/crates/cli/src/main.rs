//! `anderson` — experiment harness for the torus Anderson-Hamiltonian
//! toolkit.
//!
//! Subcommands: `run` executes an experiment described by a JSON config and
//! fills an output directory with CSV data, a fit/summary JSON and a config
//! echo; `validate` checks a config without running; `emit-plots` writes
//! gnuplot scripts next to a finished run; `oracle` runs the brute-force
//! cross-check suites.

mod config;
mod experiments;
mod output;
mod plots;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use output::RunDir;

#[derive(Parser)]
#[command(name = "anderson", version, about = "Spectral experiments for the white-noise Schrödinger operator on the 2-torus")]
struct Cli {
    /// Size of the worker pool (default: all cores). Results are identical
    /// at any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Replace the config's base seed.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Replace the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a config file and print the effective settings.
    Validate { config: PathBuf },
    /// Emit gnuplot scripts for a completed run directory.
    EmitPlots { run_dir: PathBuf },
    /// Run a brute-force oracle suite (dense | convolution | renorm | propagation | all).
    Oracle { suite: String },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    match cli.command {
        Command::Run {
            config,
            seed_override,
            out,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed_override {
                cfg.base_seed = seed;
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            cfg.validate()?;
            let run_dir = RunDir::create(&cfg.output_dir)?;
            let summary = experiments::run(&cfg, &run_dir)?;
            let failures = summary
                .get("failures")
                .and_then(|f| f.as_array())
                .map(|a| a.len())
                .unwrap_or(0);
            println!(
                "run complete: experiment {} -> {}",
                cfg.experiment.name(),
                cfg.output_dir.display()
            );
            if failures > 0 {
                println!("warning: {failures} realization(s) failed; see summary.json");
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            println!("config ok");
            Ok(())
        }
        Command::EmitPlots { run_dir } => {
            let written = plots::emit_plots(&run_dir)?;
            if written.is_empty() {
                println!("experiment has no associated plots");
            }
            for w in written {
                println!("wrote {}", run_dir.join(w).display());
            }
            Ok(())
        }
        Command::Oracle { suite } => experiments::oracle_suite(&suite),
    }
}
