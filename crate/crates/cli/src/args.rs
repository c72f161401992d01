use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "smoothspatial", version, about = "Evaluate, optimize and learn spatio-temporal specifications")]
pub struct Cli {
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Robustness of a trajectory file against the scenario formula.
    Eval(EvalArgs),
    /// Optimize the trajectories of one or more scenarios.
    Optimize(OptimizeArgs),
    /// Mine a specification with margins from demonstrations.
    Learn(LearnArgs),
    /// Compare smooth and exact geometry on random convex polygon pairs.
    Accuracy(AccuracyArgs),
    /// Write the synthetic box-world demonstrations and their learn config.
    SynthDemos(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Smooth,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub scenario: PathBuf,
    /// CSV with columns t,object,x,y,theta.
    pub trajectory: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-2)]
    pub tau: f64,
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = 50.0)]
    pub sigmoid_k: f64,
    /// Also print the robustness at every time step.
    #[arg(long)]
    pub breakdown: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(required = true)]
    pub scenarios: Vec<PathBuf>,
    /// Each scenario writes into a subdirectory named after it.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frame interval; by default frames at 0, K/4, K/2 and the final iteration.
    #[arg(long)]
    pub svg_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Directory of demonstration CSV files.
    pub demos: PathBuf,
    /// Phases, candidates and learning settings; defaults to `learn.toml` in
    /// the demonstration directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.001")]
    pub tau: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "32")]
    pub samples: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50.0)]
    pub sigmoid_k: f64,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub demos: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 118)]
    pub horizon: usize,
}
