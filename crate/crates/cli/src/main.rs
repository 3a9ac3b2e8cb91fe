use std::path::PathBuf;

use clap::{Parser, Subcommand};

use ergodikit_cli::commands;
use ergodikit_cli::config::{self, Overrides, RunConfig};
use ergodikit_cli::error::Result;

#[derive(Parser)]
#[command(
    name = "ergodikit",
    about = "Simulation and Bayesian order inference for stationary finite-state processes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a model and a trajectory from the configured scheme
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Compute order and transition posteriors for a trajectory
    Infer {
        trajectory: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Recompute the order posterior on growing prefixes
    Sweep {
        trajectory: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
    },
    /// Project a tensor file down to a lower order
    Project {
        tensor: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify that a tensor or model file is consistently stationary
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

fn load_config(path: Option<&PathBuf>, overrides: &Overrides) -> Result<RunConfig> {
    let raw = match path {
        Some(path) => config::load_raw(path)?,
        None => Default::default(),
    };
    config::resolve(raw, overrides)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let overrides = Overrides {
                seed,
                out,
                ..Default::default()
            };
            let config = load_config(config.as_ref(), &overrides)?;
            commands::cmd_simulate(&config)
        }
        Command::Infer {
            trajectory,
            config,
            out,
            nmax,
        } => {
            let overrides = Overrides {
                out,
                nmax,
                ..Default::default()
            };
            let config = load_config(config.as_ref(), &overrides)?;
            commands::cmd_infer(&config, &trajectory)
        }
        Command::Sweep {
            trajectory,
            config,
            out,
            nmax,
            grid,
        } => {
            let grid = grid.as_deref().map(config::parse_grid_flag).transpose()?;
            let overrides = Overrides {
                out,
                nmax,
                grid,
                ..Default::default()
            };
            let config = load_config(config.as_ref(), &overrides)?;
            commands::cmd_sweep(&config, &trajectory)
        }
        Command::Project { tensor, order, out } => commands::cmd_project(&tensor, order, &out),
        Command::Check { file, depth } => commands::cmd_check(&file, depth),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
