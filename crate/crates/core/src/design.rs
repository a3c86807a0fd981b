//! From a raw sample to the regression problem: plotting positions, the
//! sorted response, the design matrix and the weight matrix.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::basis::BasisFunction;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::special::{norm_pdf, norm_quantile};

/// How probability levels are assigned to the order statistics.
#[derive(Clone, Debug, PartialEq)]
pub enum PlottingScheme {
    /// `p_n = n / (N + 1)`.
    Standard,
    /// Like `Standard`, but the lowest and highest `band` fraction of levels
    /// (at least one on each side) use `(n -/+ 0.5) / (N + 1)`.
    Shrunk { band: f64 },
    /// Explicit levels; the response holds the matching sample quantiles.
    FixedLevels(Vec<f64>),
}

impl PlottingScheme {
    pub const DEFAULT_BAND: f64 = 0.01;

    pub fn shrunk() -> Self {
        PlottingScheme::Shrunk { band: Self::DEFAULT_BAND }
    }
}

pub fn plotting_positions(n: usize, scheme: &PlottingScheme) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 observations, got {n}")));
    }
    let denom = n as f64 + 1.0;
    match scheme {
        PlottingScheme::Standard => Ok((1..=n).map(|k| k as f64 / denom).collect()),
        PlottingScheme::Shrunk { band } => {
            if !(0.0..0.5).contains(band) {
                return Err(Error::Parameter(format!("shrink band {band} not in [0, 0.5)")));
            }
            let k = ((band * n as f64).floor() as usize).max(1);
            Ok((1..=n)
                .map(|i| {
                    let i_f = i as f64;
                    if i <= k {
                        (i_f - 0.5) / denom
                    } else if i > n - k {
                        (i_f + 0.5) / denom
                    } else {
                        i_f / denom
                    }
                })
                .collect())
        }
        PlottingScheme::FixedLevels(levels) => {
            check_levels(levels)?;
            Ok(levels.clone())
        }
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("no probability levels".into()));
    }
    if let Some(&p) = levels.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Domain(p));
    }
    if levels.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("levels must be strictly increasing".into()));
    }
    Ok(())
}

/// `w = phi(Phi^-1(p))^2 / (p (1 - p))`: the diagonal of the optimal weight
/// matrix when the data are normal.
pub fn plugin_normal_weights(p: &[f64]) -> Result<Vec<f64>> {
    p.iter()
        .map(|&p| {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(p));
            }
            let f = norm_pdf(norm_quantile(p));
            Ok(f * f / (p * (1.0 - p)))
        })
        .collect()
}

/// Asymptotic covariance of order statistics, `c_ij = s_i t_j` for `i <= j`
/// with `s = p / f` and `t = (1 - p) / f`. Kept in factored form so that
/// products with it cost `O(J)` per column.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderStatCov {
    s: Vec<f64>,
    t: Vec<f64>,
}

impl OrderStatCov {
    pub fn new(p: &[f64], density: &[f64]) -> Result<Self> {
        if p.len() != density.len() {
            return Err(Error::InvalidInput("levels and densities differ in length".into()));
        }
        check_levels(p)?;
        if let Some(&f) = density.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::InvalidInput(format!("density {f} is not positive")));
        }
        let s = p.iter().zip(density).map(|(p, f)| p / f).collect();
        let t = p.iter().zip(density).map(|(p, f)| (1.0 - p) / f).collect();
        Ok(OrderStatCov { s, t })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let j = self.len();
        DMatrix::from_fn(j, j, |a, b| {
            let (i, k) = if a <= b { (a, b) } else { (b, a) };
            self.s[i] * self.t[k]
        })
    }

    /// `A' C A` without forming `C`.
    pub fn sandwich(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let (j, n) = a.shape();
        assert_eq!(j, self.len());
        // prefix[l] accumulates sum_{i <= row} s_i a_il
        let mut out = DMatrix::zeros(n, n);
        let mut prefix = vec![0.0; n];
        for row in 0..j {
            for k in 0..n {
                prefix[k] += self.s[row] * a[(row, k)];
            }
            // contribution of pairs (i <= row, row) and its mirror
            for k in 0..n {
                let tk = self.t[row] * a[(row, k)];
                for l in 0..n {
                    out[(l, k)] += prefix[l] * tk;
                }
            }
        }
        // the loop counted sum_{i<=j} s_i t_j a_il a_jk; symmetrize and remove
        // the doubly counted diagonal i == j
        let mut sym = &out + out.transpose();
        for row in 0..j {
            let st = self.s[row] * self.t[row];
            for k in 0..n {
                for l in 0..n {
                    sym[(k, l)] -= st * a[(row, k)] * a[(row, l)];
                }
            }
        }
        sym
    }

    /// Exact inverse. `C = D^-1 K D^-1` with `k_ij = p_i (1 - p_j)`, and `K`
    /// has a tridiagonal inverse.
    pub fn inverse(&self) -> Weights {
        let j = self.len();
        let p: Vec<f64> = self.s.iter().zip(&self.t).map(|(s, t)| s / (s + t)).collect();
        let f: Vec<f64> = self.s.iter().zip(&self.t).map(|(s, t)| 1.0 / (s + t)).collect();
        let gap = |i: usize| -> f64 {
            // p_i - p_{i-1} with p_0 = 0, p_{J+1} = 1
            let hi = if i == j { 1.0 } else { p[i] };
            let lo = if i == 0 { 0.0 } else { p[i - 1] };
            hi - lo
        };
        let diag = (0..j).map(|i| f[i] * f[i] * (1.0 / gap(i) + 1.0 / gap(i + 1))).collect();
        let off = (0..j.saturating_sub(1)).map(|i| -f[i] * f[i + 1] / gap(i + 1)).collect();
        Weights::Tridiagonal { diag, off }
    }
}

/// Dense order-statistic covariance for levels `p` and densities `f`
/// evaluated at the corresponding quantiles.
pub fn order_stat_covariance(p: &[f64], density: &[f64]) -> Result<DMatrix<f64>> {
    Ok(OrderStatCov::new(p, density)?.dense())
}

/// A resolved symmetric positive semi-definite weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Diagonal(Vec<f64>),
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
    Full(DMatrix<f64>),
}

impl Weights {
    pub fn equal(n: usize) -> Self {
        Weights::Diagonal(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        match self {
            Weights::Diagonal(w) => w.len(),
            Weights::Tridiagonal { diag, .. } => diag.len(),
            Weights::Full(m) => m.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        match self {
            Weights::Diagonal(w) => Some(w),
            _ => None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidInput(format!(
                "weights have size {}, expected {n}",
                self.len()
            )));
        }
        match self {
            Weights::Diagonal(w) => {
                if w.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                    return Err(Error::InvalidInput("diagonal weights must be non-negative".into()));
                }
            }
            Weights::Tridiagonal { diag, off } => {
                if off.len() + 1 != diag.len().max(1) {
                    return Err(Error::InvalidInput("tridiagonal weights have bad shape".into()));
                }
            }
            Weights::Full(m) => {
                if !m.is_square() || (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                    return Err(Error::InvalidInput("weight matrix must be symmetric".into()));
                }
            }
        }
        Ok(())
    }

    /// `r' W r`.
    pub fn quad(&self, r: &DVector<f64>) -> f64 {
        match self {
            Weights::Diagonal(w) => w.iter().zip(r.iter()).map(|(w, r)| w * r * r).sum(),
            Weights::Tridiagonal { diag, off } => {
                let mut s: f64 = diag.iter().zip(r.iter()).map(|(d, r)| d * r * r).sum();
                for (i, o) in off.iter().enumerate() {
                    s += 2.0 * o * r[i] * r[i + 1];
                }
                s
            }
            Weights::Full(m) => r.dot(&(m * r)),
        }
    }

    /// `W v` for each column of `v`.
    pub fn apply(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Weights::Diagonal(w) => DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| w[i] * v[(i, k)]),
            Weights::Tridiagonal { diag, off } => {
                let n = diag.len();
                DMatrix::from_fn(v.nrows(), v.ncols(), |i, k| {
                    let mut s = diag[i] * v[(i, k)];
                    if i > 0 {
                        s += off[i - 1] * v[(i - 1, k)];
                    }
                    if i + 1 < n {
                        s += off[i] * v[(i + 1, k)];
                    }
                    s
                })
            }
            Weights::Full(m) => m * v,
        }
    }

    /// A factor `L'` with `W = L L'`, applied to `x` and `y`, so that
    /// `(y - X b)' W (y - X b) = |L'y - L'X b|^2`.
    pub fn whiten(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        match self {
            Weights::Diagonal(w) => {
                let s: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
                Ok((
                    DMatrix::from_fn(x.nrows(), x.ncols(), |i, k| s[i] * x[(i, k)]),
                    DVector::from_fn(y.len(), |i, _| s[i] * y[i]),
                ))
            }
            Weights::Tridiagonal { diag, off } => {
                let n = diag.len();
                let mut l = vec![0.0; n];
                let mut m = vec![0.0; n.saturating_sub(1)];
                for i in 0..n {
                    let mut d = diag[i];
                    if i > 0 {
                        m[i - 1] = off[i - 1] / l[i - 1];
                        d -= m[i - 1] * m[i - 1];
                    }
                    if !(d > 0.0) {
                        return Err(Error::InvalidInput("tridiagonal weights not positive definite".into()));
                    }
                    l[i] = d.sqrt();
                }
                let bidiag = |i: usize, v: &dyn Fn(usize) -> f64| {
                    let mut s = l[i] * v(i);
                    if i + 1 < n {
                        s += m[i] * v(i + 1);
                    }
                    s
                };
                Ok((
                    DMatrix::from_fn(x.nrows(), x.ncols(), |i, k| bidiag(i, &|r| x[(r, k)])),
                    DVector::from_fn(y.len(), |i, _| bidiag(i, &|r| y[r])),
                ))
            }
            Weights::Full(w) => {
                let l = cholesky_with_jitter(w)?;
                let lt = l.transpose();
                Ok((&lt * x, &lt * y))
            }
        }
    }
}

/// Lower Cholesky factor, retrying with `1e-12 trace / n` added to the
/// diagonal when the plain factorization fails.
pub fn cholesky_with_jitter(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(c) = m.clone().cholesky() {
        return Ok(c.l());
    }
    let n = m.nrows().max(1);
    let jitter = 1e-12 * m.trace().abs().max(f64::MIN_POSITIVE) / n as f64;
    let mut shifted = m.clone();
    for i in 0..m.nrows() {
        shifted[(i, i)] += jitter;
    }
    shifted.cholesky().map(|c| c.l()).ok_or(Error::RankDeficient)
}

/// How the weight matrix is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Equal,
    /// Diagonal of the optimal weights under a normal plug-in density.
    DiagonalPluginNormal,
    /// Inverse of the order-statistic covariance under a normal plug-in
    /// density.
    FullOptimalPlugin,
    Explicit(Weights),
}

impl WeightSpec {
    pub fn resolve(&self, p: &[f64]) -> Result<Weights> {
        let w = match self {
            WeightSpec::Equal => Weights::equal(p.len()),
            WeightSpec::DiagonalPluginNormal => Weights::Diagonal(plugin_normal_weights(p)?),
            WeightSpec::FullOptimalPlugin => {
                let f: Vec<f64> = p.iter().map(|&p| norm_pdf(norm_quantile(p))).collect();
                OrderStatCov::new(p, &f)?.inverse()
            }
            WeightSpec::Explicit(w) => w.clone(),
        };
        w.validate(p.len())?;
        Ok(w)
    }
}

/// The regression problem `min E(y - X theta)`.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    /// Sorted sample quantiles.
    pub y: DVector<f64>,
    /// Probability level of each row.
    pub p: Vec<f64>,
    /// `x[(j, i)] = Q_i(p_j)`; column 0 is the intercept.
    pub x: DMatrix<f64>,
    pub weights: Weights,
    /// The basis behind the columns of `x`, when known. Needed for
    /// constraints that are defined through the basis functions.
    pub catalog: Option<Vec<BasisFunction>>,
    /// Number of observations behind `y` (differs from `J` for fixed levels).
    pub sample_size: usize,
}

impl DesignProblem {
    /// Problem from explicit arrays, without an attached catalog.
    pub fn new(y: DVector<f64>, p: Vec<f64>, x: DMatrix<f64>, weights: Weights) -> Result<Self> {
        let j = y.len();
        if j == 0 || x.ncols() == 0 {
            return Err(Error::InvalidInput("empty design".into()));
        }
        if x.nrows() != j || p.len() != j {
            return Err(Error::InvalidInput(format!(
                "shape mismatch: y {j}, p {}, X {}x{}",
                p.len(),
                x.nrows(),
                x.ncols()
            )));
        }
        weights.validate(j)?;
        Ok(DesignProblem { y, p, x, weights, catalog: None, sample_size: j })
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_coef(&self) -> usize {
        self.x.ncols()
    }

    /// The same problem restricted to a subset of columns.
    pub fn select_columns(&self, cols: &[usize]) -> DesignProblem {
        DesignProblem {
            y: self.y.clone(),
            p: self.p.clone(),
            x: self.x.select_columns(cols),
            weights: self.weights.clone(),
            catalog: self.catalog.as_ref().map(|c| cols.iter().map(|&i| c[i].clone()).collect()),
            sample_size: self.sample_size,
        }
    }
}

/// Sort the sample, assign levels, evaluate the catalog and resolve weights.
pub fn build_problem(
    sample: &[f64],
    catalog: &[BasisFunction],
    scheme: &PlottingScheme,
    weights: &WeightSpec,
    exec: Exec,
) -> Result<DesignProblem> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if !catalog[0].is_constant() {
        return Err(Error::InvalidInput("catalog must start with the constant basis".into()));
    }
    if let Some(v) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample value {v}")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let p = plotting_positions(n, scheme)?;
    let y: Vec<f64> = match scheme {
        PlottingScheme::FixedLevels(levels) => levels
            .iter()
            .map(|&pj| {
                let k = (pj * (n as f64 + 1.0)).ceil() as usize;
                sorted[k.clamp(1, n) - 1]
            })
            .collect(),
        _ => sorted,
    };
    let columns = exec.map(catalog, |b| p.iter().map(|&pj| b.eval(pj)).collect::<Result<Vec<f64>>>());
    let j = p.len();
    let mut x = DMatrix::zeros(j, catalog.len());
    for (i, col) in columns.into_iter().enumerate() {
        x.set_column(i, &DVector::from_vec(col?));
    }
    let w = weights.resolve(&p)?;
    Ok(DesignProblem {
        y: DVector::from_vec(y),
        p,
        x,
        weights: w,
        catalog: Some(catalog.to_vec()),
        sample_size: n,
    })
}

/// Read a sample: one number per line (blank lines and `#` comments are
/// skipped), or, when `column` is given, a comma-separated table with a
/// header row from which that column is taken.
pub fn read_sample<R: BufRead>(reader: R, column: Option<&str>) -> Result<Vec<f64>> {
    match column {
        None => {
            let mut out = Vec::new();
            let mut first = true;
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                match t.parse::<f64>() {
                    Ok(v) => out.push(v),
                    // a one-column header
                    Err(_) if first && !t.contains(',') => {}
                    Err(_) => return Err(Error::Parse { line: i + 1, msg: format!("not a number: '{t}'") }),
                }
                first = false;
            }
            Ok(out)
        }
        Some(name) => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
            let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
            let idx = headers
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < headers.len()))
                .ok_or_else(|| Error::InvalidInput(format!("no column '{name}'")))?;
            let mut out = Vec::new();
            for (i, rec) in rdr.records().enumerate() {
                let line = i + 2;
                let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
                let cell = rec.get(idx).unwrap_or("");
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse { line, msg: format!("not a number: '{cell}'") })?;
                out.push(v);
            }
            Ok(out)
        }
    }
}

pub fn load_sample(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_sample(std::io::BufReader::new(file), column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_normal;

    #[test]
    fn standard_and_fixed_positions() {
        assert_eq!(plotting_positions(3, &PlottingScheme::Standard).unwrap(), vec![0.25, 0.5, 0.75]);
        let lv = vec![0.1, 0.5, 0.9];
        assert_eq!(plotting_positions(1000, &PlottingScheme::FixedLevels(lv.clone())).unwrap(), lv);
        assert!(plotting_positions(1, &PlottingScheme::Standard).is_err());
    }

    #[test]
    fn shrunk_positions_move_only_the_extremes() {
        let p = plotting_positions(9, &PlottingScheme::shrunk()).unwrap();
        assert!((p[0] - 0.05).abs() < 1e-15);
        assert!((p[8] - 0.95).abs() < 1e-15);
        for (i, &v) in p.iter().enumerate().take(8).skip(1) {
            assert_eq!(v, (i + 1) as f64 / 10.0);
        }
    }

    #[test]
    fn plugin_weight_at_median() {
        let w = plugin_normal_weights(&[0.5, 0.001, 0.999]).unwrap();
        let oracle = 1.0 / (2.0 * std::f64::consts::PI) / 0.25;
        assert!((w[0] - oracle).abs() < 1e-12);
        assert!((w[1] - w[2]).abs() < 1e-12 * w[1]);
        assert!(w[1] < w[0]);
    }

    #[test]
    fn covariance_small_cases() {
        let c = order_stat_covariance(&[0.5], &[1.0]).unwrap();
        assert_eq!(c[(0, 0)], 0.25);
        let c = order_stat_covariance(&[0.25, 0.75], &[1.0, 1.0]).unwrap();
        let expect = [[0.1875, 0.0625], [0.0625, 0.1875]];
        for i in 0..2 {
            for k in 0..2 {
                assert!((c[(i, k)] - expect[i][k]).abs() < 1e-15);
            }
        }
        assert!(c.clone().cholesky().is_some());
        let c2 = order_stat_covariance(&[0.25, 0.75], &[2.0, 2.0]).unwrap();
        assert!((c2 - c / 4.0).amax() < 1e-16);
        assert!(order_stat_covariance(&[0.5], &[0.0]).is_err());
    }

    #[test]
    fn tridiagonal_inverse_matches_dense_inverse() {
        let p = [0.1, 0.3, 0.35, 0.6, 0.9];
        let f = [0.4, 1.1, 0.7, 0.9, 0.2];
        let cov = OrderStatCov::new(&p, &f).unwrap();
        let dense_inv = cov.dense().try_inverse().unwrap();
        let Weights::Tridiagonal { diag, off } = cov.inverse() else { panic!() };
        for i in 0..5 {
            assert!((dense_inv[(i, i)] - diag[i]).abs() < 1e-9 * diag[i].abs());
            for k in 0..5 {
                let v = if i == k {
                    diag[i]
                } else if i + 1 == k {
                    off[i]
                } else if k + 1 == i {
                    off[k]
                } else {
                    0.0
                };
                assert!((dense_inv[(i, k)] - v).abs() < 1e-9 * diag[i].abs(), "{i},{k}");
            }
        }
    }

    #[test]
    fn sandwich_matches_dense_product() {
        let p = [0.1, 0.2, 0.5, 0.7, 0.95];
        let f = [0.3, 0.5, 0.4, 0.6, 0.1];
        let cov = OrderStatCov::new(&p, &f).unwrap();
        let a = DMatrix::from_fn(5, 3, |i, k| ((i * 7 + k * 3) % 5) as f64 - 1.5);
        let dense = a.transpose() * cov.dense() * &a;
        assert!((cov.sandwich(&a) - dense).amax() < 1e-10);
    }

    #[test]
    fn whitening_preserves_quadratic_form() {
        let p = [0.1, 0.3, 0.5, 0.8];
        let f: Vec<f64> = p.iter().map(|&p| norm_pdf(norm_quantile(p))).collect();
        let w = OrderStatCov::new(&p, &f).unwrap().inverse();
        let x = DMatrix::from_fn(4, 1, |i, _| i as f64);
        let r = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
        let (_, rt) = w.whiten(&x, &r).unwrap();
        assert!((rt.norm_squared() - w.quad(&r)).abs() < 1e-10 * w.quad(&r));
        let full = Weights::Full(w.apply(&DMatrix::identity(4, 4)));
        let (_, rt) = full.whiten(&x, &r).unwrap();
        assert!((rt.norm_squared() - w.quad(&r)).abs() < 1e-9 * w.quad(&r));
    }

    #[test]
    fn build_small_problem() {
        let cat = vec![BasisFunction::constant(), make_normal()];
        let prob =
            build_problem(&[3.0, 1.0, 2.0], &cat, &PlottingScheme::Standard, &WeightSpec::Equal, Exec::Sequential)
                .unwrap();
        assert_eq!(prob.y.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(prob.x[(1, 0)], 1.0);
        assert!(prob.x[(1, 1)].abs() < 1e-15);
        assert!(prob.x.column(0).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fixed_levels_pick_order_statistics() {
        let sample: Vec<f64> = (1..=9).map(|v| v as f64).collect();
        let cat = vec![BasisFunction::constant()];
        let scheme = PlottingScheme::FixedLevels(vec![0.1, 0.5, 0.95]);
        let prob = build_problem(&sample, &cat, &scheme, &WeightSpec::Equal, Exec::Sequential).unwrap();
        assert_eq!(prob.y.as_slice(), &[1.0, 5.0, 9.0]);
    }

    #[test]
    fn reads_plain_and_tabular_samples() {
        let plain = "1.5\n\n# note\n-2\n";
        assert_eq!(read_sample(plain.as_bytes(), None).unwrap(), vec![1.5, -2.0]);
        let table = "id,value\n1,0.5\n2,0.25\n";
        assert_eq!(read_sample(table.as_bytes(), Some("value")).unwrap(), vec![0.5, 0.25]);
        let bad = "1\nx\n";
        assert!(matches!(read_sample(bad.as_bytes(), None), Err(Error::Parse { line: 2, .. })));
    }
}
