//! `qp`: experiment runner for the quasi-periodic operator laboratory.
//!
//! Exit codes: 0 — completed with all assertions passing; 2 — completed
//! with bound-check failures (reported, not fatal); 1 — errors.

mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qp", version, about = "Finite-volume quasi-periodic operator experiments")]
struct Cli {
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "qp-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed override (otherwise the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive frequency non-resonance scan.
    Diophantine {
        /// Frequency components.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        omega: Vec<f64>,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        radius: u64,
    },
    /// Green's function norms, certificates and decay fits.
    Green {
        #[arg(long)]
        config: PathBuf,
    },
    /// Multi-scale analysis runs.
    Msa {
        #[command(subcommand)]
        action: MsaAction,
    },
    /// Integrated density of states scans.
    Ids {
        #[command(subcommand)]
        action: IdsAction,
    },
    /// Eigenvector decay report.
    Localize {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum MsaAction {
    /// Run the induction and dump every stage state.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's stage count.
        #[arg(long)]
        stages: Option<u32>,
        /// Override the config's window radius.
        #[arg(long)]
        window: Option<f64>,
    },
    /// Re-verify the invariants of a dumped run.
    Verify {
        /// Path to a state dump produced by `qp msa run`.
        #[arg(long)]
        dump: PathBuf,
    },
}

#[derive(Subcommand)]
enum IdsAction {
    /// Run the (θ, E, η) window-count grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QP_LOG", "warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match dispatch(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every bound check passed.
fn dispatch(cli: &Cli) -> Result<bool> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Diophantine {
            omega,
            tau,
            gamma,
            radius,
        } => commands::diophantine::run(&cli.out, omega, *tau, *gamma, *radius),
        Command::Green { config } => {
            let cfg = config::ExperimentConfig::load(config)?;
            commands::green::run(&cli.out, &cfg, cli.seed)
        }
        Command::Msa { action } => match action {
            MsaAction::Run {
                config,
                stages,
                window,
            } => {
                let cfg = config::ExperimentConfig::load(config)?;
                commands::msa::run(&cli.out, &cfg, *stages, *window)
            }
            MsaAction::Verify { dump } => commands::msa::verify(&cli.out, dump),
        },
        Command::Ids { action } => match action {
            IdsAction::Scan { config } => {
                let cfg = config::ExperimentConfig::load(config)?;
                commands::ids::run(&cli.out, &cfg, cli.seed)
            }
        },
        Command::Localize { config } => {
            let cfg = config::ExperimentConfig::load(config)?;
            commands::localize::run(&cli.out, &cfg)
        }
    }
}
