use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mixq::basis::{fmt_f64, make_catalog, BasisFunction, CatalogSpec, FamilySpec, Lattice};
use mixq::data::{self, Column};
use mixq::design::{build_problem, load_sample, PlottingScheme, WeightSpec};
use mixq::experiment::{run_convergence, ConvergenceSpec, Pipeline};
use mixq::metrics::{gof, sample_lmoments};
use mixq::model::FittedModel;
use mixq::par::Exec;
use mixq::solve::{
    fit, fit_cardinality_with, fit_lasso, lasso_path_to_cardinality, standard_errors, BranchOptions,
    ConstraintSet, ErrorNorm, FitResult, LMomentSpec,
};

use crate::config::{self, FileConfig};
use crate::output::{emit, write_atomic};
use crate::{Cli, CliError, Command};

const DEFAULT_SEED: u64 = 42;

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn required(flag: Option<PathBuf>, file: Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
    flag.or(file).ok_or_else(|| CliError::config(format!("missing --{key}")))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::load(cli.config.as_deref())?;
    let seed = pick(cli.seed, file.seed, DEFAULT_SEED);
    match cli.command {
        Command::Fit(a) => cmd_fit(a, file),
        Command::Sample(a) => cmd_sample(a, file, seed),
        Command::Gof(a) => cmd_gof(a, file),
        Command::Qqplot(a) => cmd_qqplot(a, file),
        Command::LogprobPlot(a) => cmd_logprob(a, file),
        Command::SimulateConvergence(a) => cmd_simulate(a, file, seed),
        Command::Drawdowns(a) => cmd_drawdowns(a, file),
    }
}

fn read_model(path: &Path) -> Result<FittedModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    FittedModel::from_text(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn read_sample(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let s = load_sample(path, column).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    if s.is_empty() {
        return Err(CliError::io(format!("{}: no observations", path.display())));
    }
    Ok(s)
}

fn default_catalog() -> CatalogSpec {
    CatalogSpec {
        families: vec![
            FamilySpec::Normal,
            FamilySpec::Exponential,
            FamilySpec::StudentT { nu: Lattice::Values(vec![2.0, 5.0, 10.0]) },
        ],
        filter: None,
        dedup: false,
    }
}

fn parse_norm(s: &str) -> Result<ErrorNorm, CliError> {
    match s {
        "l2" | "L2" => Ok(ErrorNorm::L2),
        "l1" | "L1" => Ok(ErrorNorm::L1),
        _ => Err(CliError::config(format!("unknown norm '{s}' (l1, l2)"))),
    }
}

fn parse_weights(s: &str) -> Result<WeightSpec, CliError> {
    match s {
        "equal" => Ok(WeightSpec::Equal),
        "plugin-normal" => Ok(WeightSpec::DiagonalPluginNormal),
        "full-plugin" => Ok(WeightSpec::FullOptimalPlugin),
        _ => Err(CliError::config(format!("unknown weights '{s}' (equal, plugin-normal, full-plugin)"))),
    }
}

fn cmd_fit(a: crate::FitArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.fit.unwrap_or_default();
    let input = required(a.input, sec.input, "input")?;
    let column = a.column.or(sec.column);
    let sample = read_sample(&input, column.as_deref())?;

    let mut spec = file.catalog.unwrap_or_else(default_catalog);
    if let Some(f) = spec.filter.as_mut() {
        if f.n.is_none() && (f.p_lo.is_none() || f.p_hi.is_none()) {
            f.n = Some(sample.len());
        }
    }
    let catalog = make_catalog(&spec, Exec::Sequential)?;

    let norm = parse_norm(&pick(a.norm, sec.norm, "l2".into()))?;
    let weights = parse_weights(&pick(a.weights, sec.weights, "equal".into()))?;
    let scheme = match pick(a.plotting, sec.plotting, "standard".into()).as_str() {
        "standard" => PlottingScheme::Standard,
        "shrunk" => PlottingScheme::Shrunk { band: pick(a.band, sec.band, PlottingScheme::DEFAULT_BAND) },
        s => return Err(CliError::config(format!("unknown plotting scheme '{s}' (standard, shrunk)"))),
    };
    let prob = build_problem(&sample, &catalog, &scheme, &weights, Exec::Sequential)?;

    let cs = file.constraints.unwrap_or_default();
    let lmoment = match cs.lmoment {
        Some(l) => {
            let target = match l.target {
                Some(t) => t,
                None => sample_lmoments(&sample, l.order)?,
            };
            Some(LMomentSpec { order: l.order, tolerance: l.tolerance, target })
        }
        None => None,
    };
    let cons = ConstraintSet {
        nonneg: if a.signed { false } else { sec.nonneg.unwrap_or(true) },
        cardinality: a.cardinality.or(sec.cardinality),
        upper_bounds: cs.upper_bounds,
        var: cs.var,
        cvar: cs.cvar,
        lmoment,
        linear: Vec::new(),
    };
    let lambda = a.lambda.or(sec.lambda);
    let lasso_target = a.lasso_target.or(sec.lasso_target);
    let has_extra = cons.cardinality.is_some()
        || !cons.var.is_empty()
        || !cons.cvar.is_empty()
        || cons.lmoment.is_some()
        || !cons.nonneg;
    if (lambda.is_some() || lasso_target.is_some()) && has_extra {
        return Err(CliError::config("the lasso combines only with non-negativity"));
    }

    let mut chosen_lambda = None;
    let mut result: FitResult = if let Some(l) = lambda {
        chosen_lambda = Some(l);
        fit_lasso(&prob, l, norm)?
    } else if let Some(t) = lasso_target {
        let (l, f) = lasso_path_to_cardinality(&prob, t, pick(a.lasso_step, sec.lasso_step, 1e-4), norm)?;
        chosen_lambda = Some(l);
        f
    } else if cons.cardinality.is_some() {
        let opts = BranchOptions {
            node_limit: pick(a.node_limit, sec.node_limit, BranchOptions::default().node_limit),
            exec: Exec::Sequential,
            ..BranchOptions::default()
        };
        fit_cardinality_with(&prob, &cons, norm, opts)?
    } else {
        fit(&prob, &cons, norm)?
    };
    if a.std_errors || sec.std_errors.unwrap_or(false) {
        result.cov_estimate = Some(standard_errors(&prob, &result)?);
    }

    let model = FittedModel::from_fit(&catalog, &result)?;
    let g = gof(&model, &sample, None)?;
    let report = fit_report(&result, &catalog, chosen_lambda, &g);
    if let Some(p) = a.model.or(sec.model) {
        write_atomic(&p, &model.to_text())?;
    }
    emit(a.report.or(sec.report).as_deref(), &report)
}

fn fit_report(
    f: &FitResult,
    catalog: &[BasisFunction],
    lambda: Option<f64>,
    g: &mixq::metrics::GofReport,
) -> String {
    let mut s = String::from("section,name,value\n");
    let norm = match f.norm {
        ErrorNorm::L1 => "l1",
        ErrorNorm::L2 => "l2",
    };
    let _ = writeln!(s, "fit,norm,{norm}");
    let _ = writeln!(s, "fit,objective,{}", fmt_f64(f.objective));
    let _ = writeln!(s, "fit,loss,{}", fmt_f64(f.loss));
    let _ = writeln!(s, "fit,penalty,{}", fmt_f64(f.penalty));
    if let Some(l) = lambda {
        let _ = writeln!(s, "fit,lambda,{}", fmt_f64(l));
    }
    let _ = writeln!(s, "fit,kkt_residual,{}", fmt_f64(f.kkt_residual));
    let _ = writeln!(s, "fit,optimal,{}", f.optimal);
    let _ = writeln!(s, "fit,support_size,{}", f.active_support.len());
    for (i, (t, b)) in f.theta.iter().zip(catalog).enumerate() {
        let _ = writeln!(s, "theta,{i},{}", fmt_f64(*t));
        let _ = writeln!(s, "basis,{i},{}", b.to_tokens());
    }
    let gof = g.to_csv();
    for line in gof.lines().skip(1) {
        let _ = writeln!(s, "gof,{line}");
    }
    if let Some(h) = &f.cov_estimate {
        for i in 0..h.nrows() {
            let _ = writeln!(s, "std_error,{i},{}", fmt_f64(h[(i, i)].max(0.0).sqrt()));
        }
    }
    s
}

fn cmd_sample(a: crate::SampleArgs, file: FileConfig, seed: u64) -> Result<(), CliError> {
    let sec = file.sample.unwrap_or_default();
    let model = read_model(&required(a.model, sec.model, "model")?)?;
    let n = pick(a.n, sec.n, 1000);
    if n == 0 {
        return Err(CliError::config("sample size must be at least 1"));
    }
    let draws = model.sample(n, seed)?;
    let mut s = String::from("value\n");
    for v in draws {
        s.push_str(&fmt_f64(v));
        s.push('\n');
    }
    emit(a.output.or(sec.output).as_deref(), &s)
}

fn cmd_gof(a: crate::GofArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.gof.unwrap_or_default();
    let model = read_model(&required(a.model, sec.model, "model")?)?;
    let column = a.column.or(sec.column);
    let sample = read_sample(&required(a.input, sec.input, "input")?, column.as_deref())?;
    let r = gof(&model, &sample, None)?;
    emit(a.output.or(sec.output).as_deref(), &r.to_csv())
}

fn levels(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |k| k as f64 / (n as f64 + 1.0))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn cmd_qqplot(a: crate::QqArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.qqplot.unwrap_or_default();
    let model = read_model(&required(a.model, sec.model, "model")?)?;
    let column = a.column.or(sec.column);
    let x = sorted(read_sample(&required(a.input, sec.input, "input")?, column.as_deref())?);
    let y = levels(x.len()).map(|p| model.evaluate(p)).collect::<Result<Vec<_>, _>>()?;
    let mut s = String::from("kind,x,y\n");
    for (xi, yi) in x.iter().zip(&y) {
        let _ = writeln!(s, "point,{},{}", fmt_f64(*xi), fmt_f64(*yi));
    }
    let lo = x[0].min(y[0]);
    let hi = x[x.len() - 1].max(y[y.len() - 1]);
    let _ = writeln!(s, "reference,{},{}", fmt_f64(lo), fmt_f64(lo));
    let _ = writeln!(s, "reference,{},{}", fmt_f64(hi), fmt_f64(hi));
    emit(a.output.or(sec.output).as_deref(), &s)
}

/// Empirical quantile by linear interpolation on sorted data.
fn empirical(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn cmd_logprob(a: crate::LogprobArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.logprob_plot.unwrap_or_default();
    let column = a.column.or(sec.column);
    let y = sorted(read_sample(&required(a.input, sec.input, "input")?, column.as_deref())?);
    let models = if a.models.is_empty() { sec.models.unwrap_or_default() } else { a.models };
    let standardize = if a.raw { false } else { sec.standardize.unwrap_or(true) };
    let (shift, scale) = if standardize {
        let iqr = empirical(&y, 0.75) - empirical(&y, 0.25);
        if !(iqr > 0.0) {
            return Err(CliError::config("sample has zero interquartile range; use --raw"));
        }
        (empirical(&y, 0.5), iqr)
    } else {
        (0.0, 1.0)
    };
    let std = |v: f64| (v - shift) / scale;
    let mut s = String::from("series,x,y\n");
    for (p, v) in levels(y.len()).zip(&y) {
        let _ = writeln!(s, "sample,{},{}", fmt_f64(-(-p).ln_1p()), fmt_f64(std(*v)));
    }
    let grid: Vec<f64> = match a.curve_points.or(sec.curve_points) {
        Some(0) => return Err(CliError::config("curve_points must be positive")),
        Some(m) => levels(m).collect(),
        None => levels(y.len()).collect(),
    };
    for (k, path) in models.iter().enumerate() {
        let m = read_model(path)?;
        let name = path.file_stem().map_or_else(|| format!("model{k}"), |s| s.to_string_lossy().into_owned());
        for &p in &grid {
            let _ = writeln!(s, "{name},{},{}", fmt_f64(-(-p).ln_1p()), fmt_f64(std(m.evaluate(p)?)));
        }
    }
    emit(a.output.or(sec.output).as_deref(), &s)
}

fn cmd_simulate(a: crate::SimulateArgs, file: FileConfig, seed: u64) -> Result<(), CliError> {
    let sec = file.simulate.unwrap_or_default();
    let mut spec =
        if a.full || sec.full.unwrap_or(false) { ConvergenceSpec::full(seed) } else { ConvergenceSpec::reduced(seed) };
    if let Some(s) = a.sizes.or(sec.sizes) {
        spec.sizes = s;
    }
    if let Some(r) = a.reps.or(sec.reps) {
        spec.reps = r;
    }
    if let Some(b) = a.band.or(sec.band) {
        spec.band = b;
    }
    let pipelines = match pick(a.pipeline, sec.pipeline, "both".into()).as_str() {
        "l2" => vec![Pipeline::L2PluginNormal],
        "l1" => vec![Pipeline::L1Equal],
        "both" => vec![Pipeline::L2PluginNormal, Pipeline::L1Equal],
        p => return Err(CliError::config(format!("unknown pipeline '{p}' (l2, l1, both)"))),
    };
    let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
    let mut summary = String::new();
    let mut trials = String::new();
    for (i, p) in pipelines.into_iter().enumerate() {
        let r = run_convergence(&spec, p, exec)?;
        // one header for the concatenated tables
        let skip = usize::from(i > 0);
        for line in r.summary_csv().lines().skip(skip) {
            summary.push_str(line);
            summary.push('\n');
        }
        for line in r.trials_csv().lines().skip(skip) {
            trials.push_str(line);
            trials.push('\n');
        }
    }
    if let Some(t) = a.trials.or(sec.trials) {
        write_atomic(&t, &trials)?;
    }
    emit(a.output.or(sec.output).as_deref(), &summary)
}

fn cmd_drawdowns(a: crate::DrawdownArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.drawdowns.unwrap_or_default();
    let input = required(a.input, sec.input, "input")?;
    let date = Column::parse(&pick(a.date_column, sec.date_column, data::DEFAULT_DATE_COLUMN.into()));
    let price = Column::parse(&pick(a.price_column, sec.price_column, data::DEFAULT_PRICE_COLUMN.into()));
    let series = data::load_prices(&input, &date, &price).map_err(|e| match e {
        mixq::Error::InvalidInput(m) => CliError::io(format!("{}: {m}", input.display())),
        e => CliError::io(format!("{}: {e}", input.display())),
    })?;
    let d = data::drawdown_series(&series.price)?;
    let records = data::drawdown_periods(&d);
    let table = data::records_to_csv(&records, Some(&series))?;
    if let Some(v) = a.values.or(sec.values) {
        let log = !(a.raw || sec.raw.unwrap_or(false));
        let include_open = a.include_open || sec.include_open.unwrap_or(false);
        let mut s = String::from("value\n");
        for x in data::fit_values(&records, log, include_open) {
            s.push_str(&fmt_f64(x));
            s.push('\n');
        }
        write_atomic(&v, &s)?;
    }
    let output = a.output.or(sec.output);
    emit(output.as_deref(), &table)?;
    let line = format!("periods: {}", records.len());
    if output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}
