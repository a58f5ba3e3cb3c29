//! `sns` — spectral Navier-Stokes simulator and certifier.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::RunConfig;
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "sns", version, about = "Spectral Galerkin simulator for the stochastically forced 3D Navier-Stokes equations")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, default_value = "configs/default.json")]
    config: PathBuf,
    /// Override the ensemble base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Drop the convective term; run the linear Stokes dynamics.
    #[arg(long, global = true)]
    linear_only: bool,
    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured ensemble; write the energy ledger, snapshots
    /// and manifest.
    Simulate,
    /// Evaluate the suitability certificates on a trajectory (fresh or
    /// from a snapshot).
    Certify {
        /// Trajectory snapshot (`.snst`) to certify instead of running.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// Bump placement `t_c,x,y,z,rho_t,rho_x`.
        #[arg(long)]
        bump: Option<String>,
    },
    /// Krylov-Bogoliubov averages, stationarity tests and the
    /// dissipation-rate fit.
    Stationary,
    /// Built-in verification suites.
    Selftest {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Delta-t refinement ladder on a single fine noise path.
    Ladder {
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Run(format!("thread pool: {e}")))?;

    let (cfg, hash) = RunConfig::load(&cli.config)?;
    let ctx = Ctx::new(cfg, hash, cli.out, cli.seed, cli.linear_only, threads)?;

    match &cli.cmd {
        Cmd::Simulate => {
            commands::simulate(&ctx)?;
            Ok(0)
        }
        Cmd::Certify { traj, bump } => commands::certify(&ctx, traj.as_deref(), bump.as_deref()),
        Cmd::Stationary => commands::stationary(&ctx),
        Cmd::Selftest { suite } => commands::selftest(&ctx, suite),
        Cmd::Ladder { levels } => commands::ladder(&ctx, *levels),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} check(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
