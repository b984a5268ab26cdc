//! `calplan`: design, evaluate and simulate manipulator calibration plans.

mod args;
mod commands;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] calplan::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("report serialization failed: {0}")]
    Report(#[from] toml::ser::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerically infeasible or failed runs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical_failure() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "calplan",
    version,
    about = "Calibration experiment design for serial manipulators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model selection shared by most commands.
#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file, or `builtin:NAME` (two_link, two_link_offsets, two_link_full, six_r).
    #[arg(long)]
    pub model: String,
}

#[derive(Debug, Args)]
pub struct PoseArg {
    /// Test pose, comma-separated joint angles (`20deg`, `0.3rad`, bare numbers are radians).
    #[arg(long, value_parser = args::angles, allow_hyphen_values = true)]
    pub test_pose: args::AngleList,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pose: PoseArg,
    /// Number of measurement configurations.
    #[arg(long)]
    pub m: usize,
    /// Measurement noise standard deviation per axis (m).
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 512)]
    pub starts: usize,
    #[arg(long, default_value_t = 0.1)]
    pub filter_quantile: f64,
    /// Final pattern-search step (rad).
    #[arg(long, default_value_t = 1e-8)]
    pub local_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_local_iters: usize,
    /// Override joint limits: `min:max,...` per joint.
    #[arg(long, value_parser = args::joint_limits, allow_hyphen_values = true)]
    pub joint_limits: Option<args::LimitList>,
    /// Workspace box `xmin,ymin,zmin,xmax,ymax,zmax` (m).
    #[arg(long, value_parser = args::workspace, allow_hyphen_values = true)]
    pub workspace: Option<[f64; 6]>,
    /// Random plans scored for comparison (0 disables).
    #[arg(long, default_value_t = 1000)]
    pub baseline: usize,
    /// Where to write the plan CSV.
    #[arg(long)]
    pub out_plan: PathBuf,
    /// Where to write the report (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub pose: PoseArg,
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub pose: PoseArg,
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gauss-Newton iteration cap per trial.
    #[arg(long, default_value_t = calplan::identification::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Use the nominal parameters as the truth instead of drawing perturbed ones.
    #[arg(long)]
    pub nominal_truth: bool,
    /// Per-trial CSV output.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// SVG scatter of test-pose errors.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pose: PoseArg,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 20_000)]
    pub plans: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = args::workspace, allow_hyphen_values = true)]
    pub workspace: Option<[f64; 6]>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pose: PoseArg,
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    /// `name=plan.csv`, repeated.
    #[arg(long = "plan", value_parser = args::named_path, required = true)]
    pub plans: Vec<(String, String)>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Test-pose elbow angles; defaults to 0, 30, ..., 180 degrees.
    #[arg(long, value_parser = args::angles, allow_hyphen_values = true)]
    pub q20: Option<args::AngleList>,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Measurement CSV (`q_1..q_n,p_x,p_y,p_z`).
    #[arg(long)]
    pub measurements: PathBuf,
    #[arg(long, default_value_t = calplan::identification::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = calplan::identification::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Random probe configurations (at least the number of parameters).
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a measurement plan for a test pose.
    Design(DesignArgs),
    /// Score an existing plan.
    Evaluate(EvaluateArgs),
    /// Monte Carlo calibration campaign for a plan.
    Simulate(SimulateArgs),
    /// Accuracy of random plans.
    Baseline(BaselineArgs),
    /// Side-by-side scores and accuracy gains of several plans.
    Compare(CompareArgs),
    /// Closed-form two-link reference values.
    #[command(name = "analytic-2r")]
    Analytic2r(AnalyticArgs),
    /// Identify parameters from a measurement file.
    Identify(IdentifyArgs),
    /// Find parameters that do not affect the position.
    Screen(ScreenArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design(a) => commands::design(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Analytic2r(a) => commands::analytic_2r(&a),
        Command::Identify(a) => commands::identify(&a),
        Command::Screen(a) => commands::screen(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
