//! Command-line driver for the foot models and the in-silico experiments.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Overrides, RawConfig, Units};

#[derive(Parser, Debug)]
#[command(
    name = "softfoot",
    version,
    about = "Static analysis of rigid, compliant and articulated feet"
)]
struct Cli {
    /// JSON configuration file; omitted keys take default values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Length unit of the configuration file.
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,
    /// Recorded in the provenance log; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Load carried by the foot [kg].
    #[arg(long, global = true)]
    load_kg: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve the articulated foot under the configured load.
    Equilibrium,
    /// Compare nonlinear, linear and closed-form solutions.
    Linearize,
    /// Compliance over a grid of sole and arch stiffnesses.
    ComplianceMap,
    /// Load sweeps over the terrain catalog with support-polygon lengths.
    TiltSweep,
    /// Rigid, compliant and adaptive planar models side by side.
    PlanarCompare,
    /// Equilibrium shapes along a load sequence.
    Gallery,
}

fn run(cli: Cli) -> Result<bool> {
    let raw = match &cli.config {
        Some(path) => config::read_raw(path)?,
        None => RawConfig::default(),
    };
    let overrides = Overrides {
        units: cli.units,
        out: cli.out.clone(),
        seed: cli.seed,
        load_kg: cli.load_kg,
    };
    let (cfg, provenance) = config::resolve(raw, &overrides)?;
    let out: &Path = &cfg.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("provenance.txt"), provenance.text())
        .with_context(|| format!("writing provenance to {}", out.display()))?;
    let outcome = match cli.command {
        Command::Equilibrium => commands::equilibrium(&cfg, out)?,
        Command::Linearize => commands::linearize(&cfg, out)?,
        Command::ComplianceMap => commands::compliance(&cfg, out)?,
        Command::TiltSweep => commands::sweep(&cfg, out)?,
        Command::PlanarCompare => commands::planar(&cfg, out)?,
        Command::Gallery => commands::gallery(&cfg, out)?,
    };
    for path in &outcome.written {
        log::info!("wrote {}", path.display());
    }
    for failure in &outcome.failures {
        eprintln!("failed: {failure}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SOFTFOOT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
