//! `fdmimo`: run full-duplex MIMO link-level scenarios from JSON configs.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fdmimo_core::config::parse_config;
use fdmimo_core::output::emit_csv;
use fdmimo_core::sim::complexity_report;
use fdmimo_core::{run_scenario, ScenarioConfig, Scheme};

#[derive(Debug, Parser)]
#[command(name = "fdmimo", version, about = "Full-duplex MIMO link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its rate curves as CSV.
    Run(RunArgs),
    /// Print phase-shifter and tap counts for a configuration.
    Complexity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check configuration files without running them.
    Validate {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated subset of schemes, e.g. `proposed,hd`.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
}

/// Failure class, mapped to the process exit code.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, Failure> {
    parse_config(path)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(Failure::Config)
}

fn apply_overrides(cfg: &mut ScenarioConfig, args: &RunArgs) -> Result<(), Failure> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(list) = &args.schemes {
        cfg.schemes = list
            .iter()
            .map(|s| s.trim().parse::<Scheme>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Config(e.into()))?;
    }
    cfg.validate().map_err(|e| Failure::Config(e.into()))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = load(&args.config)?;
            apply_overrides(&mut cfg, &args)?;
            let points = run_scenario(&cfg).map_err(|e| Failure::Runtime(e.into()))?;
            emit_csv(&points, &args.out)
                .with_context(|| format!("writing {}", args.out.display()))
                .map_err(Failure::Runtime)?;
        }
        Command::Complexity { config } => {
            let cfg = load(&config)?;
            let r = complexity_report(&cfg.architecture);
            let a = &cfg.architecture;
            println!(
                "architecture: N={} M={} N_T={} M_R={} K={}",
                a.n, a.m, a.n_t, a.m_r, a.k
            );
            println!("phase shifters (partially connected): {}", r.phase_shifters_partial);
            println!("phase shifters (fully connected): {}", r.phase_shifters_full);
            println!("taps (antenna-level canceller, N*M): {}", r.taps_antenna_level);
            println!("taps (chain-level canceller, N_T*M_R): {}", r.taps_chain_level);
            println!("taps (reduced canceller, K): {}", r.taps_reduced);
        }
        Command::Validate { config } => {
            for path in &config {
                load(path)?;
                println!("{}: ok", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}
