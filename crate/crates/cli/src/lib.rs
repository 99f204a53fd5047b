//! Command-line front end: simulation sweeps, standalone pooled tests, VaR
//! backtests, tail dependence and subset-design checks.

mod commands;
mod ingest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poolmax::ErrorClass;

pub use ingest::{ingest_panel, read_groups, write_panel, Panel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Core(poolmax::Error),
    Usage(String),
    Io(String),
    ParseError { line: usize, column: usize, field: String },
    RaggedRows { line: usize },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::ParseError { line, column, field } => {
                write!(
                    f,
                    "parse error at line {line}, column {column}: '{field}' is not a number"
                )
            }
            CliError::RaggedRows { line } => write!(f, "ragged rows: line {line} has the wrong number of fields"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<poolmax::Error> for CliError {
    fn from(e: poolmax::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Degenerate => EXIT_DEGENERATE,
            },
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::ParseError { .. } | CliError::RaggedRows { .. } => EXIT_DATA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "poolmax",
    version,
    about = "Subsets-pooled max tests for shrinking random variables and VaR backtests"
)]
pub struct Cli {
    /// Worker threads; results do not depend on this value [default: all cores]
    #[arg(long, global = true, env = "POOLMAX_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo size/power sweep over a (q, d) grid
    Simulate(SimulateArgs),
    /// Subsets-pooled max test with multiplier-bootstrap calibration
    PoolTest(PoolTestArgs),
    /// Full-pool test with the normal reference
    NaiveTest(NaiveTestArgs),
    /// Max test over raw columns with multiplier-bootstrap calibration
    MarginalTest(MarginalTestArgs),
    /// Validation and comparative VaR backtests
    Backtest(BacktestArgs),
    /// Upper tail dependence matrix of residual panels
    Taildep(TaildepArgs),
    /// Exact identifiability check of the circular (p, q) design
    SubsetsCheck(SubsetsCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file [default: standard output]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: json for single tests, csv for sweeps and reports]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Subset cardinality; must be coprime with p
    #[arg(long, default_value_t = 49)]
    pub q: usize,
    /// Number of subsets [default: 2p]
    #[arg(long)]
    pub d: Option<usize>,
    /// Bootstrap replicates
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Generating process: A1, A2, B1 or B2
    #[arg(long, default_value = "A1")]
    pub model: String,
    /// Observations per replication
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Dimension
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Size of each deviating block
    #[arg(long, default_value_t = 20)]
    pub p0: usize,
    /// Simulate under the null (no deviating blocks)
    #[arg(long)]
    pub null: bool,
    /// Tail mass of the B-model mixture
    #[arg(long, default_value_t = 0.01)]
    pub alpha_n: f64,
    /// Comma-separated subset cardinalities
    #[arg(long, value_delimiter = ',', default_value = "49")]
    pub q: Vec<usize>,
    /// Comma-separated subset counts [default: 2p]
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    /// Monte Carlo replications
    #[arg(long, default_value_t = 500)]
    pub mc_reps: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PoolTestArgs {
    /// Input panel (CSV, header row of identifiers)
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub design: DesignArgs,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Random seed for the subset design and the bootstrap
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the per-subset statistics in the output
    #[arg(long)]
    pub per_subset: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct NaiveTestArgs {
    /// Input panel (CSV, header row of identifiers)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MarginalTestArgs {
    /// Input panel (CSV, header row of identifiers)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the per-column statistics in the output
    #[arg(long)]
    pub per_subset: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    /// Loss panel (negative log returns)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Precomputed forecast panel as NAME=PATH; repeatable
    #[arg(long = "forecast", value_name = "NAME=PATH")]
    pub forecasts: Vec<String>,
    /// VaR methods to forecast when no --forecast is given (empirical, skewt, evt, evt:<k>)
    #[arg(long, value_delimiter = ',', default_value = "empirical,skewt,evt")]
    pub methods: Vec<String>,
    /// Rolling estimation window
    #[arg(long, default_value_t = 3000)]
    pub window: usize,
    /// Forecast days at the end of the sample [default: rows - window]
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Days between GARCH refits
    #[arg(long, default_value_t = 1)]
    pub refit_every: usize,
    /// Write computed forecast panels to this directory
    #[arg(long)]
    pub save_forecasts: Option<PathBuf>,
    /// Target exceedance probability
    #[arg(long, default_value_t = 0.01)]
    pub theta0: f64,
    #[command(flatten)]
    pub design: DesignArgs,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TaildepArgs {
    /// Residual panel, or a loss panel together with --filter
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Tail probability
    #[arg(long, default_value_t = 0.01)]
    pub u: f64,
    /// Fit an AR(1)-GARCH(1,1) per column and use the filtered residuals
    #[arg(long)]
    pub filter: bool,
    /// Two-column id,group file used to order the matrix
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Random seed for optimizer restarts
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SubsetsCheckArgs {
    /// Dimension
    #[arg(long)]
    pub p: usize,
    /// Window length
    #[arg(long)]
    pub q: usize,
    /// Largest p handled by the exact rational rank check
    #[arg(long, default_value_t = poolmax::subsets::DEFAULT_EXACT_BOUND)]
    pub bound: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| commands::dispatch(cli.command))
}
