//! Command-line harness: experiment configs, reproduction recipes, privacy
//! and bound reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::reproduce::Target;

pub const DEFAULT_REPRODUCE_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "privsprt", version, about = "Private sequential probability ratio test experiments")]
pub struct Cli {
    /// Worker threads for the trial loop; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for result files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write CSV, JSON and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce a published table or figure.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        /// Fraction of the full 100000 trials per row, in (0, 1].
        #[arg(long, default_value_t = 0.1)]
        scale: f64,
    },
    /// Best (epsilon, delta) guarantee of a configuration.
    PrivacyReport {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample-size and error bounds next to empirical estimates.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Execute a parsed command line, printing a summary to stdout.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(config)?.with_seed(cli.seed);
            let m = commands::cmd_run(&cfg, &cli.out_dir)?;
            for p in &m.outputs {
                println!("wrote {}", p.display());
            }
            println!("config hash {}", m.config_hash);
        }
        Command::Reproduce { target, scale } => {
            let seed = cli.seed.unwrap_or(DEFAULT_REPRODUCE_SEED);
            let (_, rows) = reproduce::cmd_reproduce(*target, *scale, seed, &cli.out_dir)?;
            print!("{}", reproduce::format_comparison(&rows));
        }
        Command::PrivacyReport { config } => {
            let cfg = RunConfig::load(config)?.with_seed(cli.seed);
            let (_, report) = commands::cmd_privacy_report(&cfg, &cli.out_dir)?;
            println!("{}", commands::to_pretty(&report));
        }
        Command::Bounds { config } => {
            let cfg = RunConfig::load(config)?.with_seed(cli.seed);
            let (_, report) = commands::cmd_bounds(&cfg, &cli.out_dir)?;
            println!("{}", commands::to_pretty(&report));
        }
    }
    Ok(())
}

/// Run on a dedicated pool when `--threads` is given.
pub fn execute_with_threads(cli: &Cli) -> CliResult<()> {
    match cli.threads {
        Some(n) => privsprt_core::simulation::with_threads(n, || execute(cli))?,
        None => execute(cli),
    }
}
