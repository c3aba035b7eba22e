//! `maxbloch` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};

use commands::{Flags, RunContext};
use config::{RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(name = "maxbloch", version, about = "Scattering, asymptotics and a direct oracle for the Maxwell-Bloch amplifier")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Evaluation lattice `t0:t1:nt,x0:x1:nx`; overrides `grid.lattice`.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Multiplies every numerical tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// a(k), b(k), r(k) on a line of k values.
    Scatter,
    /// Zeros of b in the upper half-plane with residues and velocities.
    Zeros,
    /// Asymptotic field on the lattice.
    Asym,
    /// Run the direct oracle and write the binary grid.
    Simulate,
    /// Probe a stored binary grid on the lattice.
    Slice {
        #[arg(long)]
        input: PathBuf,
    },
    /// Oracle against asymptotics on the lattice, with per-region statistics.
    Compare,
    /// Region of every lattice point.
    Regions,
    /// Write the parsed configuration with every default filled in.
    Config,
}

fn run(cli: Cli) -> Result<PathBuf> {
    let path = cli
        .config
        .ok_or_else(|| UsageError("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = RunConfig::from_toml(&text)?;
    let flags = Flags {
        out: cli.out,
        grid: cli.grid,
        tol_scale: cli.tol_scale,
    };
    let ctx = RunContext::new(cfg, flags)?;
    match cli.command {
        Command::Scatter => commands::scatter(&ctx),
        Command::Zeros => commands::zeros(&ctx),
        Command::Asym => commands::asym(&ctx),
        Command::Simulate => commands::simulate_cmd(&ctx),
        Command::Slice { input } => commands::slice(&ctx, &input),
        Command::Compare => commands::compare(&ctx),
        Command::Regions => commands::regions(&ctx),
        Command::Config => commands::dump_config(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error[usage]: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error[compute]: {e:#}");
            ExitCode::from(1)
        }
    }
}
