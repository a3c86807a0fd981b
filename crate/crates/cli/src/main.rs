use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn io(msg: impl Into<String>) -> Self {
        CliError { code: 1, msg: msg.into() }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<mixq::Error> for CliError {
    fn from(e: mixq::Error) -> Self {
        use mixq::Error as E;
        let code = match &e {
            E::Io(_) | E::Parse { .. } => 1,
            E::Domain(_) | E::Parameter(_) | E::EmptyCatalog | E::KnotOrder | E::InvalidInput(_) => 2,
            E::Convergence(_)
            | E::RankDeficient
            | E::Infeasible
            | E::Unbounded
            | E::IterationLimit(_)
            | E::Divergent(_)
            | E::Degenerate(_) => 3,
        };
        CliError { code, msg: e.to_string() }
    }
}

/// Fit, sample and check mixture-quantile distributions.
#[derive(Debug, Parser)]
#[command(name = "mixq", version, after_long_help = config::KEYS_HELP)]
pub struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed for `sample` and `simulate-convergence`
    #[arg(long, global = true, env = "MIXQ_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a sample and write the model and a report
    Fit(FitArgs),
    /// Draw a sample from a model by inverse transform
    Sample(SampleArgs),
    /// Goodness-of-fit statistics of a model on a sample (WMSE, MAE, KS, LLK)
    Gof(GofArgs),
    /// Q-Q plot data: order statistics against model quantiles
    Qqplot(QqArgs),
    /// Log-probability plot data: -log(1 - p) against sample and model values
    LogprobPlot(LogprobArgs),
    /// Convergence study on a skewed-t mixture
    SimulateConvergence(SimulateArgs),
    /// Drawdown periods of a price series
    Drawdowns(DrawdownArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sample file: one number per line, or CSV with --column
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// CSV column holding the sample (name or zero-based index)
    #[arg(long)]
    pub column: Option<String>,
    /// Error norm: l2 or l1 [default: l2]
    #[arg(long)]
    pub norm: Option<String>,
    /// Weights: equal, plugin-normal or full-plugin [default: equal]
    #[arg(long)]
    pub weights: Option<String>,
    /// Plotting positions: standard (n/(N+1)) or shrunk [default: standard]
    #[arg(long)]
    pub plotting: Option<String>,
    /// Tail fraction pulled in by shrunk plotting positions [default: 0.01]
    #[arg(long)]
    pub band: Option<f64>,
    /// Drop the non-negativity restriction on theta_i, i >= 1
    #[arg(long)]
    pub signed: bool,
    /// At most this many non-zero coefficients besides the intercept
    #[arg(long)]
    pub cardinality: Option<usize>,
    /// Branch-and-bound node limit [default: 100000]
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Lasso penalty
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Search the lasso path for at most this many non-zero coefficients
    #[arg(long)]
    pub lasso_target: Option<usize>,
    /// Step of the lasso path search [default: 1e-4]
    #[arg(long)]
    pub lasso_step: Option<f64>,
    /// Report standard errors from the asymptotic covariance
    #[arg(long)]
    pub std_errors: bool,
    /// Output model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output report (CSV); standard output when absent
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Number of draws [default: 1000]
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Output CSV; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QqArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LogprobArgs {
    /// Model files; each adds a curve
    #[arg(long = "model")]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Plot raw values instead of (y - median) / IQR of the sample
    #[arg(long)]
    pub raw: bool,
    /// Evaluate curves on this many evenly spaced levels instead of the
    /// sample levels
    #[arg(long)]
    pub curve_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sample sizes, comma separated [default: 100,1000,10000]
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Repetitions per size [default: 20]
    #[arg(long)]
    pub reps: Option<usize>,
    /// Lower tail of the reported band [default: 0.05]
    #[arg(long)]
    pub band: Option<f64>,
    /// l2, l1 or both [default: both]
    #[arg(long)]
    pub pipeline: Option<String>,
    /// Full grid: 9 sizes, 100 repetitions, 121 basis functions
    #[arg(long)]
    pub full: bool,
    /// Run repetitions on one thread
    #[arg(long)]
    pub sequential: bool,
    /// Summary CSV; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-trial CSV
    #[arg(long)]
    pub trials: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DrawdownArgs {
    /// Price table (CSV with header)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Date column, name or index [default: Date]
    #[arg(long)]
    pub date_column: Option<String>,
    /// Price column, name or index [default: Adj Close]
    #[arg(long)]
    pub price_column: Option<String>,
    /// Drawdown table; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the values to fit, one per row
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Write raw maximum drawdowns instead of their logarithms
    #[arg(long)]
    pub raw: bool,
    /// Keep a final drawdown that has not recovered
    #[arg(long)]
    pub include_open: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mixq: {e}");
            ExitCode::from(e.code)
        }
    }
}
