//! `nhlgi`: plot-ready data series and the acceptance gate from the command line.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "nhlgi", version, about = "Leggett–Garg violations under PT-symmetric non-Hermitian qubit dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bloch-vector trajectory from |↑⟩_y at uniform time steps.
    Trajectory(TrajectoryArgs),
    /// Geodesic distance to |↓⟩_y and S_n per θ; `--rescaled` gives δ and the
    /// trace distance under H_θ → cosθ·H_θ.
    Distance(DistanceArgs),
    /// Evolution speed v(t) per θ, numeric and closed form.
    Speed(SeriesArgs),
    /// K₃(t) with measurements at 0, t, 2t (or --t1 --t2 --t3) per θ.
    Lgi(LgiArgs),
    /// K₃(t) per noise strength κ close to the exceptional point.
    Noise(NoiseArgs),
    /// K₃ᵐᵃˣ(θ) and vᵐᵃˣ(θ) by multi-start direct search.
    Scan(ScanArgs),
    /// K₃ᵐᵃˣ(κ) close to the exceptional point.
    Noisescan(NoiseScanArgs),
    /// Post-selected dilation versus direct evolution.
    Embed(EmbedArgs),
    /// Runs the acceptance suite; exits 1 if any criterion fails.
    Check(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Cartesian,
    Abn,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TimeGrid {
    #[arg(long, default_value_t = 0.0)]
    pub tmin: f64,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = nhlgi::dynamics::DEFAULT_STEP)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[arg(long, conflicts_with = "delta", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// θ = π/2 − δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value = "cartesian")]
    pub frame: FrameArg,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Comma-separated θ values.
    #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_THETAS, allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Rescale H_θ → cosθ·H_θ and report the trace distance as well.
    #[arg(long)]
    pub rescaled: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LgiArgs {
    #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_THETAS, allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// Comma-separated spacings t (measurements at 0, t, 2t); overrides the grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long, requires_all = ["t2", "t3"], conflicts_with = "t", allow_hyphen_values = true)]
    pub t1: Option<f64>,
    #[arg(long, requires_all = ["t1", "t3"], allow_hyphen_values = true)]
    pub t2: Option<f64>,
    #[arg(long, requires_all = ["t1", "t2"], allow_hyphen_values = true)]
    pub t3: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kappa: f64,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[arg(long, conflicts_with = "delta", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_NOISE_KAPPAS, allow_hyphen_values = true)]
    pub kappa: Vec<f64>,
    /// Comma-separated spacings t; overrides the grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = nhlgi::scan::ScanConfig::default().budget)]
    pub budget: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_delimiter = ',', default_values_t = commands::default_scan_thetas(), allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseScanArgs {
    #[arg(long, conflicts_with = "delta", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated κ grid (default: 0 plus two points per decade over [1e-6, 1e4]).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub kappa: Option<Vec<f64>>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_EMBED_THETAS, conflicts_with = "delta", allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// Comma-separated δ values, θ = π/2 − δ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Option<Vec<f64>>,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure classes, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration: exit 2.
    Usage(String),
    /// A numerical routine failed: exit 1, naming the subsystem.
    Numerical { subsystem: &'static str, source: nhlgi::Error },
    /// Writing the output failed: exit 1.
    Io(std::io::Error),
    /// `check` found failing criteria: exit 1.
    Failed(usize),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "usage error: {msg}"),
            Self::Numerical { subsystem, source } => write!(f, "{subsystem} failed: {source}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Failed(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Tags core errors with the subsystem that raised them.
pub trait Subsystem<T> {
    fn in_subsystem(self, subsystem: &'static str) -> Result<T, CliError>;
}

impl<T> Subsystem<T> for nhlgi::Result<T> {
    fn in_subsystem(self, subsystem: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { subsystem, source })
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NHLGI_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("NHLGI_THREADS must be a positive integer, got {raw:?}")))?;
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn write_output(output: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(CliError::Io),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(CliError::Io)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| commands::run(&cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nhlgi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
