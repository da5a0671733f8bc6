use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "vi-bench", version)]
#[command(about = "Run, compare and validate iterative solvers for monotone variational inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one algorithm and write its trace
    #[command(after_help = "Example:\n    vi-bench run --preset example3 --algorithm vtegm --csv trace.csv")]
    Run(RunArgs),
    /// Run several algorithms from the same start and compare them
    #[command(
        after_help = "Example:\n    vi-bench compare --preset example2 --algorithms tegm,vsegm,thegm,vtegm --csv cmp.csv"
    )]
    Compare(CompareArgs),
    /// Check the schedule and step-size conditions of a problem
    Validate(ValidateArgs),
    /// List the built-in problems
    Presets(PresetsArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in problem (see `vi-bench presets`)
    #[arg(long)]
    pub preset: Option<String>,
    /// Problem file (JSON)
    #[arg(long)]
    pub problem: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemOpts {
    #[command(flatten)]
    pub source: Source,
    /// Reject schedules whose alpha_n or beta_n leave [0, 1]
    #[arg(long)]
    pub strict_schedules: bool,
    /// Override the fixed step size
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Line-search initial trial step
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Line-search backtracking factor
    #[arg(long)]
    pub l: Option<f64>,
    /// Line-search acceptance constant
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct StopOpts {
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: u64,
    /// Stop once the natural residual is at most this
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Declare divergence once the iterate norm exceeds this
    #[arg(long, default_value_t = 1e12)]
    pub divergence_norm: f64,
    /// Keep iterating after the emptiness heuristic fires
    #[arg(long)]
    pub no_empty_halt: bool,
    /// Run THEGM with the fixed step instead of its line search
    #[arg(long)]
    pub fixed_step_thegm: bool,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemOpts,
    #[arg(long)]
    pub algorithm: String,
    #[command(flatten)]
    pub stop: StopOpts,
    /// Trace output
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Residual chart
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemOpts,
    /// Comma-separated list, at least two
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Vec<String>,
    #[command(flatten)]
    pub stop: StopOpts,
    /// Wide CSV, one column per algorithm
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub problem: ProblemOpts,
}

#[derive(Args, Debug)]
pub struct PresetsArgs {
    /// Machine-readable listing
    #[arg(long, conflicts_with = "name")]
    pub json: bool,
    /// Print the full problem file of one preset
    #[arg(long)]
    pub name: Option<String>,
}
