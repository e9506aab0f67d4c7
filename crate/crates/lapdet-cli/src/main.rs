//! `lapdet` — detectability certificates for graph Laplacian dynamics.

mod commands;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "lapdet",
    version,
    about = "Certify detectability of graph Laplacian dynamics, simulate them, and witness the result with a Kalman filter"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Analyze a graph or LPV schedule and emit a JSON report
    Analyze(AnalyzeArgs),
    /// Generate a graph file (path, cycle, complete, grid, diffusion1d, random)
    Generate(GenerateArgs),
    /// Simulate the discretized dynamics and write a trajectory trace
    Simulate(SimulateArgs),
    /// Run the Kalman-filter witness and write a covariance/error trace
    Estimate(EstimateArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Graph file to analyze
    #[arg(long, conflicts_with_all = ["schedule", "batch"])]
    pub graph: Option<PathBuf>,
    /// LPV schedule JSON file (array of {graph, dt} segments)
    #[arg(long, conflicts_with = "batch")]
    pub schedule: Option<PathBuf>,
    /// Directory of .txt graph files to analyze concurrently (--out names
    /// the report directory)
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Sampling step for the discretization (required with --graph/--batch)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Comma-separated 1-based node indices measured directly
    #[arg(long, conflicts_with = "c_matrix")]
    pub measure: Option<String>,
    /// Output matrix file (first line `rows cols`, then row-major entries)
    #[arg(long)]
    pub c_matrix: Option<PathBuf>,
    /// Input matrix file; adds the dual stabilizability certificate
    #[arg(long)]
    pub b_matrix: Option<PathBuf>,
    /// Random vectors sampled by the norm-uniqueness certificate
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Seed for all randomized evidence
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout if omitted); output directory in batch mode
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Graph family: path, cycle, complete, grid, diffusion1d, or random
    pub kind: String,
    /// Node count (derived from --rows/--cols for grids)
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid rows
    #[arg(long)]
    pub rows: Option<usize>,
    /// Grid columns
    #[arg(long)]
    pub cols: Option<usize>,
    /// Uniform edge weight for diffusion1d
    #[arg(long, default_value_t = 1.0)]
    pub diffusivity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower edge-weight bound
    #[arg(long, default_value_t = 1.0)]
    pub weight_lo: f64,
    /// Upper edge-weight bound
    #[arg(long, default_value_t = 1.0)]
    pub weight_hi: f64,
    /// Destination graph file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub dt: f64,
    /// Comma-separated 1-based measured nodes (default: all states)
    #[arg(long, conflicts_with = "c_matrix")]
    pub measure: Option<String>,
    #[arg(long)]
    pub c_matrix: Option<PathBuf>,
    /// Input matrix file (the simulation itself applies zero input)
    #[arg(long)]
    pub b_matrix: Option<PathBuf>,
    /// Comma-separated initial state (default: 1 on node 1, 0 elsewhere)
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Output file (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[arg(long, conflicts_with = "schedule")]
    pub graph: Option<PathBuf>,
    /// LPV schedule JSON file; steps cycle through its segments
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Sampling step (required with --graph)
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, conflicts_with = "c_matrix")]
    pub measure: Option<String>,
    #[arg(long)]
    pub c_matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Process-noise variance q (Q = q·I)
    #[arg(long, default_value_t = 0.01)]
    pub process_noise: f64,
    /// Measurement-noise variance r (R = r·I)
    #[arg(long, default_value_t = 0.01)]
    pub measurement_noise: f64,
    /// Initial covariance p0 (P₀ = p0·I)
    #[arg(long, default_value_t = 1.0)]
    pub initial_cov: f64,
    /// True initial state (default: seeded standard normal)
    #[arg(long)]
    pub x0: Option<String>,
    /// Filter's initial estimate (default: zero)
    #[arg(long)]
    pub est_x0: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
