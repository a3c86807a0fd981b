//! Constrained estimation of the mixture coefficients under weighted L2 or
//! L1 error: closed form, non-negative least squares, a dual active-set QP
//! for general linear constraints, a simplex-based LAD solver, cardinality
//! constraints by branch-and-bound, and the non-negative lasso.

mod cardinality;
mod constraints;
mod covariance;
mod lad;
mod lasso;
mod nnls;
mod qp;
mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

pub use cardinality::{fit_cardinality, fit_cardinality_with, BranchOptions};
pub use constraints::{cvar_coefficients, lmoment_constraint_rows, AuxRows};
pub use covariance::{asymptotic_covariance, standard_errors, Sandwich};
pub use lasso::{fit_lasso, lasso_path_to_cardinality};

use crate::design::DesignProblem;
use crate::error::{Error, Result};

/// Coefficients with magnitude at or below this are counted as zero.
pub const SUPPORT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    L1,
    L2,
}

impl ErrorNorm {
    pub fn order(self) -> f64 {
        match self {
            ErrorNorm::L1 => 1.0,
            ErrorNorm::L2 => 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    AtMost,
    AtLeast,
}

/// A bound on the model quantile (or its tail mean) at one level.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelBound {
    pub level: f64,
    pub bound: f64,
    #[serde(default)]
    pub direction: Direction,
}

/// Bound on the summed absolute deviation of the first `order` L-moments of
/// the model from `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct LMomentSpec {
    pub order: usize,
    pub tolerance: f64,
    pub target: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

/// `coef' z (<=|>=|=) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coef: Vec<f64>,
    pub rhs: f64,
    pub kind: RowKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    /// `theta_i >= 0` for every `i >= 1`; the intercept is always free.
    pub nonneg: bool,
    /// At most this many non-zero `theta_i`, `i >= 1`. Implies `nonneg`.
    pub cardinality: Option<usize>,
    /// Upper bounds `u_i` used by the cardinality relaxation. Derived from
    /// the unconstrained non-negative fit when absent.
    pub upper_bounds: Option<Vec<f64>>,
    /// Bounds on `G(p)`.
    pub var: Vec<LevelBound>,
    /// Bounds on `(1 - p)^-1 int_p^1 G`.
    pub cvar: Vec<LevelBound>,
    pub lmoment: Option<LMomentSpec>,
    /// Extra rows over `theta`.
    pub linear: Vec<LinearRow>,
}

impl ConstraintSet {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn nonneg() -> Self {
        ConstraintSet { nonneg: true, ..Self::default() }
    }

    pub fn with_cardinality(c: usize) -> Self {
        ConstraintSet { nonneg: true, cardinality: Some(c), ..Self::default() }
    }

    fn has_rows(&self) -> bool {
        !(self.var.is_empty() && self.cvar.is_empty() && self.lmoment.is_none() && self.linear.is_empty())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub theta: Vec<f64>,
    pub norm: ErrorNorm,
    /// `(sum w |r|^q / J)^(1/q)`.
    pub objective: f64,
    /// The minimized sum `sum w |r|^q` (`r' W r` for a full weight matrix).
    pub loss: f64,
    /// Lasso penalty `lambda sum_{i>=1} theta_i`, zero otherwise.
    pub penalty: f64,
    pub residuals: Vec<f64>,
    /// Indices `i >= 1` with `|theta_i| > SUPPORT_TOL`.
    pub active_support: Vec<usize>,
    /// `H / N` when requested.
    pub cov_estimate: Option<DMatrix<f64>>,
    /// Largest optimality-condition violation, relative to the problem scale.
    pub kkt_residual: f64,
    /// False when branch-and-bound stopped at its node limit.
    pub optimal: bool,
}

pub fn support_of(theta: &[f64]) -> Vec<usize> {
    (1..theta.len()).filter(|&i| theta[i].abs() > SUPPORT_TOL).collect()
}

/// Weighted loss of `theta` on `prob`.
pub fn loss_of(prob: &DesignProblem, theta: &[f64], norm: ErrorNorm) -> Result<f64> {
    let r = residuals(prob, theta);
    match norm {
        ErrorNorm::L2 => Ok(prob.weights.quad(&r)),
        ErrorNorm::L1 => {
            let w = prob
                .weights
                .diagonal()
                .ok_or_else(|| Error::InvalidInput("L1 error needs diagonal weights".into()))?;
            Ok(w.iter().zip(r.iter()).map(|(w, r)| w * r.abs()).sum())
        }
    }
}

fn residuals(prob: &DesignProblem, theta: &[f64]) -> DVector<f64> {
    &prob.y - &prob.x * DVector::from_column_slice(theta)
}

pub(crate) fn assemble(
    prob: &DesignProblem,
    theta: Vec<f64>,
    norm: ErrorNorm,
    kkt_residual: f64,
) -> Result<FitResult> {
    let loss = loss_of(prob, &theta, norm)?;
    let j = prob.n_obs() as f64;
    let objective = (loss.max(0.0) / j).powf(1.0 / norm.order());
    let residuals = residuals(prob, &theta).iter().copied().collect();
    let active_support = support_of(&theta);
    Ok(FitResult {
        theta,
        norm,
        objective,
        loss,
        penalty: 0.0,
        residuals,
        active_support,
        cov_estimate: None,
        kkt_residual,
        optimal: true,
    })
}

/// Constraint rows over `z = (theta, aux)` plus sign restrictions.
#[derive(Clone, Debug)]
pub(crate) struct System {
    pub n_theta: usize,
    pub n_aux: usize,
    pub rows: Vec<LinearRow>,
    /// `z_i >= 0`.
    pub bounded: Vec<bool>,
}

impl System {
    pub fn n_total(&self) -> usize {
        self.n_theta + self.n_aux
    }

    pub fn plain(n_theta: usize, nonneg: bool) -> Self {
        let bounded = (0..n_theta).map(|i| nonneg && i > 0).collect();
        System { n_theta, n_aux: 0, rows: vec![], bounded }
    }

    /// Keep only the listed `theta` columns (aux variables are kept).
    pub fn select(&self, cols: &[usize]) -> System {
        let map_row = |r: &LinearRow| LinearRow {
            coef: cols
                .iter()
                .map(|&i| r.coef[i])
                .chain(r.coef[self.n_theta..].iter().copied())
                .collect(),
            rhs: r.rhs,
            kind: r.kind,
        };
        let bounded = cols
            .iter()
            .map(|&i| self.bounded[i])
            .chain(self.bounded[self.n_theta..].iter().copied())
            .collect();
        System { n_theta: cols.len(), n_aux: self.n_aux, rows: self.rows.iter().map(map_row).collect(), bounded }
    }
}

pub(crate) fn compile(prob: &DesignProblem, cons: &ConstraintSet) -> Result<System> {
    let n = prob.n_coef();
    let nonneg = cons.nonneg || cons.cardinality.is_some();
    let mut sys = System::plain(n, nonneg);
    if !cons.has_rows() {
        return Ok(sys);
    }
    let catalog = || {
        prob.catalog
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("quantile constraints need the basis catalog".into()))
    };
    let kind_of = |d: Direction| match d {
        Direction::AtMost => RowKind::Le,
        Direction::AtLeast => RowKind::Ge,
    };
    for vb in &cons.var {
        let cat = catalog()?;
        let coef = cat.iter().map(|b| b.eval(vb.level)).collect::<Result<Vec<_>>>()?;
        sys.rows.push(LinearRow { coef, rhs: vb.bound, kind: kind_of(vb.direction) });
    }
    for cb in &cons.cvar {
        let cat = catalog()?;
        let coef = cat.iter().map(|b| cvar_coefficients(b, cb.level)).collect::<Result<Vec<_>>>()?;
        sys.rows.push(LinearRow { coef, rhs: cb.bound, kind: kind_of(cb.direction) });
    }
    for row in &cons.linear {
        if row.coef.len() != n {
            return Err(Error::InvalidInput(format!(
                "linear constraint has {} coefficients, expected {n}",
                row.coef.len()
            )));
        }
        sys.rows.push(row.clone());
    }
    if let Some(lm) = &cons.lmoment {
        let aux = lmoment_constraint_rows(catalog()?, lm.order, &lm.target, lm.tolerance)?;
        sys.n_aux = aux.n_aux;
        for r in &mut sys.rows {
            r.coef.resize(n + aux.n_aux, 0.0);
        }
        sys.rows.extend(aux.rows);
        sys.bounded.extend(std::iter::repeat(true).take(aux.n_aux));
    }
    Ok(sys)
}

fn validate(prob: &DesignProblem, cons: &ConstraintSet) -> Result<()> {
    if cons.cardinality == Some(0) {
        return Err(Error::Parameter("cardinality must be at least 1".into()));
    }
    if let Some(u) = &cons.upper_bounds {
        if u.len() != prob.n_coef() || u.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Parameter("upper bounds must be positive, one per coefficient".into()));
        }
    }
    for b in cons.var.iter().chain(&cons.cvar) {
        if !(b.level > 0.0 && b.level < 1.0) {
            return Err(Error::Domain(b.level));
        }
    }
    if let Some(lm) = &cons.lmoment {
        if !(lm.tolerance >= 0.0) {
            return Err(Error::Parameter(format!("L-moment tolerance {}", lm.tolerance)));
        }
    }
    Ok(())
}

/// Minimize the weighted squared error in whitened form `|b - A z|^2 / 2 +
/// lin' z` over the system. Returns `z` and a relative KKT residual.
pub(crate) fn solve_l2(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lin: Option<&DVector<f64>>,
    sys: &System,
) -> Result<(DVector<f64>, f64)> {
    if sys.rows.is_empty() && sys.n_aux == 0 {
        let out = nnls::nnls(a, b, lin, &sys.bounded)?;
        return Ok((out.x, out.kkt));
    }
    let n = sys.n_total();
    let nt = sys.n_theta;
    let gram = a.tr_mul(a);
    let trace = gram.trace().max(f64::MIN_POSITIVE);
    let mut g = DMatrix::zeros(n, n);
    g.view_mut((0, 0), (nt, nt)).copy_from(&gram);
    for i in nt..n {
        g[(i, i)] = 1e-10 * trace / nt as f64;
    }
    let mut lin_full = DVector::zeros(n);
    lin_full.rows_mut(0, nt).copy_from(&(-a.tr_mul(b)));
    if let Some(c) = lin {
        lin_full += c;
    }
    let well_posed = g.clone().cholesky().is_some_and(|c| {
        let l = c.l();
        (0..n).all(|i| l[(i, i)] * l[(i, i)] > 1e-13 * g[(i, i)].max(f64::MIN_POSITIVE))
    });
    if !well_posed {
        let ridge = 1e-12 * trace / nt as f64;
        for i in 0..n {
            g[(i, i)] += ridge;
        }
    }
    let mut cons = Vec::with_capacity(sys.rows.len() + n);
    for (i, &bnd) in sys.bounded.iter().enumerate() {
        if bnd {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            cons.push(qp::Constraint { normal: e, rhs: 0.0, equality: false });
        }
    }
    for r in &sys.rows {
        let c = DVector::from_column_slice(&r.coef);
        cons.push(match r.kind {
            RowKind::Ge => qp::Constraint { normal: c, rhs: r.rhs, equality: false },
            RowKind::Le => qp::Constraint { normal: -c, rhs: -r.rhs, equality: false },
            RowKind::Eq => qp::Constraint { normal: c, rhs: r.rhs, equality: true },
        });
    }
    let out = qp::solve_qp(&g, &lin_full, &cons)?;
    // stationarity: G z + lin - sum mu_k c_k = 0, mu >= 0 on inequalities
    let mut station = &g * &out.x + &lin_full;
    for (c, &mu) in cons.iter().zip(&out.multipliers) {
        station.axpy(-mu, &c.normal, 1.0);
    }
    let scale = g.amax() * out.x.amax() + lin_full.amax() + f64::MIN_POSITIVE;
    let mut kkt = station.amax() / scale;
    for (c, &mu) in cons.iter().zip(&out.multipliers) {
        if !c.equality {
            kkt = kkt.max((-mu).max(0.0) / scale);
            let slack = c.normal.dot(&out.x) - c.rhs;
            kkt = kkt.max((-slack).max(0.0) / (c.rhs.abs() + c.normal.amax() * out.x.amax() + 1e-300));
        }
    }
    Ok((out.x, kkt))
}

/// Weighted least squares under `cons`.
pub fn fit_wls(prob: &DesignProblem, cons: &ConstraintSet) -> Result<FitResult> {
    validate(prob, cons)?;
    if cons.cardinality.is_some() {
        return fit_cardinality(prob, cons, ErrorNorm::L2);
    }
    let sys = compile(prob, cons)?;
    let (a, b) = prob.weights.whiten(&prob.x, &prob.y)?;
    let (z, kkt) = solve_l2(&a, &b, None, &sys)?;
    let theta = z.rows(0, sys.n_theta).iter().copied().collect();
    assemble(prob, theta, ErrorNorm::L2, kkt)
}

/// Weighted least absolute deviations under `cons`. Requires diagonal
/// weights.
pub fn fit_lad(prob: &DesignProblem, cons: &ConstraintSet) -> Result<FitResult> {
    validate(prob, cons)?;
    if cons.cardinality.is_some() {
        return fit_cardinality(prob, cons, ErrorNorm::L1);
    }
    let sys = compile(prob, cons)?;
    let (z, gap) = lad::solve_l1(prob, None, &sys)?;
    let theta = z.rows(0, sys.n_theta).iter().copied().collect();
    assemble(prob, theta, ErrorNorm::L1, gap)
}

/// Dispatch on the error norm.
pub fn fit(prob: &DesignProblem, cons: &ConstraintSet, norm: ErrorNorm) -> Result<FitResult> {
    match norm {
        ErrorNorm::L2 => fit_wls(prob, cons),
        ErrorNorm::L1 => fit_lad(prob, cons),
    }
}
