//! Command-line surface.
//!
//! Exit codes: 0 success, 1 any error (unreadable or malformed input,
//! layout mismatch, missing ids, pipeline failure), 2 `solve` found no real
//! solution.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::config::Config;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NO_SOLUTION: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cyclereg", version, about = "Minimal n-cycle solvers and multi-scan registration")]
pub struct Cli {
    /// Seed for every random choice. Overrides the seeds of the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one minimal instance and dump every real solution as JSON.
    Solve(SolveArgs),
    /// Register a match file: decomposition, RANSAC, averaging, translations.
    Register(RegisterArgs),
    /// Noise sweep of the four method pipelines (CSV).
    SynthBench(SynthBenchArgs),
    /// Real-solution count histogram (CSV).
    Histogram(HistogramArgs),
    /// Wall-clock time per solver call (CSV plus a JSON sidecar).
    Timing(TimingArgs),
    /// Relative-pose errors of a trajectory against ground truth (JSON).
    Eval(EvalArgs),
    /// Write a random noise-free minimal instance and its truth sidecar.
    GenInstance(GenInstanceArgs),
    /// Write a synthetic scan sequence as a match file plus its trajectory.
    GenGraph(GenGraphArgs),
    /// Print the effective configuration as JSON.
    Config(OutputArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Destination file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Match file with the instance rows in layout order.
    pub instance: PathBuf,
    /// pairwise, cycle3, cycle4, cycle5, planar2, planar3 or planar4.
    #[arg(long)]
    pub solver: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Match file (`scan_a,scan_b,ax,ay,az,bx,by,bz`).
    pub matches: PathBuf,
    /// Trajectory output.
    #[arg(long, short)]
    pub output: PathBuf,
    /// JSON report: census, per-edge provenance, failures, components.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// ASCII PLY of every matched point mapped into its reference frame.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseModelArg {
    Linear,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct SynthBenchArgs {
    /// Comma-separated sigma0 levels.
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub model: Option<NoiseModelArg>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    /// Solver name or `all`.
    #[arg(long, default_value = "all")]
    pub solver: String,
    #[arg(long)]
    pub trials: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    /// Hardware, trial count and the reference figures, as JSON.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub estimate: PathBuf,
    pub truth: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenInstanceArgs {
    #[arg(long)]
    pub solver: String,
    /// Instance file; the truth goes to `<output>.truth.json`.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    /// Match file output.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Ground-truth trajectory output.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub scans: Option<usize>,
    /// Each scan overlaps the next `window` scans.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub matches_per_edge: Option<usize>,
    /// sigma0 of the linear noise model.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub outliers: Option<f64>,
}

pub fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    match &cli.command {
        Command::Solve(a) => commands::solve(&cfg, a),
        Command::Register(a) => commands::register(&cfg, a),
        Command::SynthBench(a) => commands::synth_bench(&cfg, a),
        Command::Histogram(a) => commands::histogram(&cfg, a),
        Command::Timing(a) => commands::timing(&cfg, a),
        Command::Eval(a) => commands::eval(a),
        Command::GenInstance(a) => commands::gen_instance(&cfg, a),
        Command::GenGraph(a) => commands::gen_graph(&cfg, a),
        Command::Config(out) => {
            commands::emit(out.output.as_deref(), cfg.to_json().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
