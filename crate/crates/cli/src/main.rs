//! `ocs` — scenario runner for the lattice cluster-state simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

mod config;
mod manifest;
mod scenario;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Environment variable overriding the worker-thread count.
const WORKERS_ENV: &str = "OCS_WORKERS";

#[derive(Parser)]
#[command(name = "ocs", version, about = "Optical-lattice cluster-state simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the scenario named in the config file.
    Run {
        /// Path to the scenario configuration.
        config: PathBuf,
    },
    /// Re-run the scenario's parameter chain over a knob grid.
    Sweep {
        config: PathBuf,
        /// Knob to sweep: theta, v0p, as (nm) or g.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Also evolve the schedule per point and record the peak fidelity.
        #[arg(long)]
        with_fidelity: bool,
    },
    /// Export the Bloch bands of the configured lattice.
    Bands {
        config: PathBuf,
    },
}

fn configure_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("{WORKERS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// 2 for configuration problems, 3 for numeric failures.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<ocs_core::Error>() {
            return match core {
                ocs_core::Error::Config(_) => 2,
                ocs_core::Error::Numeric(_) => 3,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match cli.command {
        Command::Run { config } => {
            let r = config::load(&config)?;
            let manifest = scenario::run_scenario(&r)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
        Command::Sweep { config, param, from, to, points, with_fidelity } => {
            let r = config::load(&config)?;
            let p = sweep::SweepParam::parse(&param)?;
            let table = sweep::run_sweep(&r, p, from, to, points, with_fidelity)?;
            println!("wrote {}", table.display());
            Ok(())
        }
        Command::Bands { config } => {
            let r = config::load(&config)?;
            let manifest = scenario::run_bands(&r)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}
