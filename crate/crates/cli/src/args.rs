use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dist::DistSpec;

#[derive(Debug, Parser)]
#[command(name = "cspec", version, about = "Spectra of random-conductance chains on a segment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an environment file.
    Gen(GenArgs),
    /// Solve the lowest modes of an environment file.
    Solve(SolveArgs),
    /// Convergence sweep over sizes and seeds.
    Sweep(SweepArgs),
    /// Rescaled ratio trajectory against its tangent profiles.
    Trajectory(TrajectoryArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of sites N.
    #[arg(long)]
    pub n: usize,
    /// homog | uniform:a,b | lognormal:m,s | pareto:alpha
    #[arg(long, default_value = "homog")]
    pub dist: DistSpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Number of modes, counting the constant mode 0 (default: all N).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Relative bisection tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also run the Sturm-count oracle and report discrepancies.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dist: Option<DistSpec>,
    /// Comma-separated sizes, e.g. 128,256,512.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Seeds 0..S.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Highest compared mode K0.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Directory for SVG plots.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON convergence report including the log-log gap slope.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Rescaled spectral parameter α = N²λ (default π²).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Directory for the SVG plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
