use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "memfhn",
    version,
    about = "Memristive FitzHugh-Nagumo network simulator and synchronization checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the dissipativity and synchronization constants for a configuration.
    Constants(ConstantsArgs),
    /// Run a simulation and write metrics (and optional snapshots).
    Simulate(SimulateArgs),
    /// Run the built-in oracle and convergence checks.
    Verify,
    /// Reproduce the reference constants, point samples and figures.
    ReproducePaper(ReproduceArgs),
    /// Render an SVG chart from an existing metrics CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Also write `constants.csv` into this directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (overrides `out_dir` in the config; default `out`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Fraction of recorded rows used by the asynchronous-degree estimate.
    #[arg(long, value_name = "X")]
    pub tail_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Simulation configuration (default: the bundled table configuration).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "DIR", default_value = "out/reproduce")]
    pub out: PathBuf,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "X")]
    pub tail_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Metrics CSV written by `simulate` or `reproduce-paper`.
    #[arg(value_name = "CSV")]
    pub csv: PathBuf,
    /// Comma-separated column names (default: every `u_norm_*` column).
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long)]
    pub log_y: bool,
    /// Output directory (default: next to the CSV).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
