//! `thinshell` — seeded numerical experiments on the concentration of the
//! Euclidean norm of isotropic log-concave vectors.

mod config;
mod experiments;
mod report;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use report::{emit_report, Verdict};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "thinshell",
    version,
    about = "Numerical laboratory for norm concentration of isotropic log-concave vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from the registry and emit CSV/JSONL/summary.
    Run {
        /// Registry key (see `thinshell list`).
        experiment: String,
        /// INI-style config file (key = value under [experiment]/[params]).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed override (required when no config file is given).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Rayon worker count (0 = default). Results are worker-invariant.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Add reference overlay columns to the tail CSVs.
        #[arg(long, default_value_t = false)]
        overlays: bool,
    },
    /// Print the experiment registry with the claim each key checks.
    List,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::List => {
            for runner in experiments::REGISTRY {
                println!("{:<20} {}", runner.key, runner.claim);
            }
            Ok(0)
        }
        Command::Run { experiment, config, seed, out, workers, overlays } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let parsed = config::parse_config(&text)?;
                    if !parsed.experiment.is_empty() && parsed.experiment != experiment {
                        bail!(
                            "config names experiment `{}` but `{}` was requested",
                            parsed.experiment,
                            experiment
                        );
                    }
                    parsed
                }
                None => ExperimentConfig {
                    seed: seed.ok_or_else(|| {
                        anyhow::anyhow!("validation: field `seed` is required (pass --seed)")
                    })?,
                    ..ExperimentConfig::default()
                },
            };
            cfg.experiment = experiment.clone();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.out_dir = out;
            if workers > 0 {
                cfg.workers = workers;
            }
            cfg.overlays |= overlays;
            if cfg.workers > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build_global()
                    .context("building the worker pool")?;
            }
            let output = experiments::run_experiment(&experiment, &cfg)?;
            let files = emit_report(&cfg.out_dir, &experiment, &output.records, &output.tables)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            let mut failed = 0usize;
            for rec in &output.records {
                println!("[{}] {}", rec.verdict.label(), rec.claim);
                if rec.verdict == Verdict::Fail {
                    failed += 1;
                }
            }
            if failed > 0 {
                bail!("{failed} hard assertion(s) failed");
            }
            Ok(0)
        }
    }
}
