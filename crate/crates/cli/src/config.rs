//! TOML run configuration. Every key is optional; command-line flags win
//! over the file, and the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use mixq::basis::CatalogSpec;
use mixq::solve::LevelBound;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub catalog: Option<CatalogSpec>,
    pub constraints: Option<ConstraintSection>,
    pub fit: Option<FitSection>,
    pub sample: Option<SampleSection>,
    pub gof: Option<GofSection>,
    pub qqplot: Option<QqSection>,
    pub logprob_plot: Option<LogprobSection>,
    pub simulate: Option<SimulateSection>,
    pub drawdowns: Option<DrawdownSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    #[serde(default)]
    pub var: Vec<LevelBound>,
    #[serde(default)]
    pub cvar: Vec<LevelBound>,
    pub lmoment: Option<LMomentSection>,
    pub upper_bounds: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LMomentSection {
    pub order: usize,
    #[serde(default)]
    pub tolerance: f64,
    /// Defaults to the sample L-moments of the fitted data.
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub norm: Option<String>,
    pub weights: Option<String>,
    pub plotting: Option<String>,
    pub band: Option<f64>,
    pub nonneg: Option<bool>,
    pub cardinality: Option<usize>,
    pub node_limit: Option<usize>,
    pub lambda: Option<f64>,
    pub lasso_target: Option<usize>,
    pub lasso_step: Option<f64>,
    pub std_errors: Option<bool>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub model: Option<PathBuf>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GofSection {
    pub model: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QqSection {
    pub model: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogprobSection {
    pub models: Option<Vec<PathBuf>>,
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub output: Option<PathBuf>,
    pub standardize: Option<bool>,
    pub curve_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub band: Option<f64>,
    pub pipeline: Option<String>,
    pub full: Option<bool>,
    pub output: Option<PathBuf>,
    pub trials: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawdownSection {
    pub input: Option<PathBuf>,
    pub date_column: Option<String>,
    pub price_column: Option<String>,
    pub output: Option<PathBuf>,
    pub values: Option<PathBuf>,
    pub raw: Option<bool>,
    pub include_open: Option<bool>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Keys accepted in the configuration file, shown by `--help`.
pub const KEYS_HELP: &str = "\
CONFIGURATION FILE (--config, TOML; flags override file values):
  seed = <u64>                         random seed (also MIXQ_SEED)
  [catalog]                            basis catalog used by `fit`
    dedup = <bool>                     drop members identical to an earlier one
    [[catalog.family]]                 one table per family; `kind` is one of
      kind = \"normal\" | \"exponential\" | \"uniform\"
      kind = \"student-t\", nu = <lattice>
      kind = \"skewed-t\", gamma = <lattice>, nu = <lattice>
      kind = \"gb2\", theta1..theta4 = <lattice>
      kind = \"ispline\", degree = 3, knots = [..] or interior = <n>
      a <lattice> is a number, a list, or {start, stop, step}
    [catalog.filter]                   drop members outside a quantile range
      n, p_lo, p_hi, q_min = 1e-4, q_max = 1e3
  [constraints]                        used by `fit`
    var = [{level, bound, direction = \"at-most\" | \"at-least\"}]
    cvar = [{level, bound, direction}]
    lmoment = {order, tolerance = 0, target = [..]}  (target defaults to the sample L-moments)
    upper_bounds = [..]                one per coefficient, for cardinality fits
  [fit]      input, column, norm, weights, plotting, band, nonneg, cardinality,
             node_limit, lambda, lasso_target, lasso_step, std_errors, model, report
  [sample]   model, n, output
  [gof]      model, input, column, output
  [qqplot]   model, input, column, output
  [logprob_plot]  models = [..], input, column, output, standardize, curve_points
  [simulate] sizes = [..], reps, band, pipeline, full, output, trials
  [drawdowns]     input, date_column, price_column, output, values, raw, include_open

Without a [catalog] section `fit` uses normal, exponential and student-t (nu = 2, 5, 10).

EXIT CODES: 0 success, 1 input/output error, 2 configuration error, 3 solver error.";
