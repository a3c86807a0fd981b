//! Goodness-of-fit statistics, weighted Wasserstein distances and L-moments.

use std::fmt;

use crate::basis::BasisFunction;
use crate::error::{Error, Result};
use crate::model::FittedModel;
use crate::quad::{integrate_unit, UnitQuad};

/// Quadrature settings for distances: endpoint shells are added until one
/// contributes less than `1e-8` of the running total.
pub fn distance_quad() -> UnitQuad {
    UnitQuad { rel_tol: 1e-11, tail_tol: 1e-8, ..UnitQuad::default() }
}

/// `(int_0^1 |q1 - q2|^q w dp)^(1/q)`.
pub fn wasserstein<F1, F2, W>(q1: F1, q2: F2, w: W, q: f64) -> Result<f64>
where
    F1: Fn(f64) -> Result<f64>,
    F2: Fn(f64) -> Result<f64>,
    W: Fn(f64) -> f64,
{
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Parameter(format!("Wasserstein order {q}")));
    }
    let v = integrate_unit(|p| Ok((q1(p)? - q2(p)?).abs().powf(q) * w(p)), distance_quad())?;
    Ok(v.max(0.0).powf(1.0 / q))
}

/// Unweighted distance between two fitted models.
pub fn model_distance(a: &FittedModel, b: &FittedModel, q: f64) -> Result<f64> {
    wasserstein(|p| a.evaluate(p), |p| b.evaluate(p), |_| 1.0, q)
}

/// `(int |Q|^q w)^(1/q)` of one basis function.
pub fn basis_norm<W: Fn(f64) -> f64>(b: &BasisFunction, q: f64, w: W) -> Result<f64> {
    wasserstein(|p| b.eval(p), |_| Ok(0.0), w, q)
}

/// Returns `(W_q(G_true, G_fit), M |theta_true - theta_fit|_1)` where `M` is
/// the largest basis norm in the shared catalog.
pub fn wasserstein_bound_check<W: Fn(f64) -> f64 + Copy>(
    m_true: &FittedModel,
    m_fit: &FittedModel,
    q: f64,
    w: W,
) -> Result<(f64, f64)> {
    if m_true.catalog() != m_fit.catalog() {
        return Err(Error::InvalidInput("models must share one catalog".into()));
    }
    let lhs = wasserstein(|p| m_true.evaluate(p), |p| m_fit.evaluate(p), w, q)?;
    let mut big_m: f64 = 0.0;
    for b in m_true.catalog() {
        big_m = big_m.max(basis_norm(b, q, w)?);
    }
    let l1: f64 = m_true.theta().iter().zip(m_fit.theta()).map(|(a, b)| (a - b).abs()).sum();
    Ok((lhs, big_m * l1))
}

/// `F_k(p)` for `k = 1..=4`.
pub fn lmoment_weight(k: usize, p: f64) -> f64 {
    match k {
        1 => 1.0,
        2 => 2.0 * p - 1.0,
        3 => 6.0 * p * p - 6.0 * p + 1.0,
        4 => 20.0 * p * p * p - 30.0 * p * p + 12.0 * p - 1.0,
        _ => f64::NAN,
    }
}

fn check_order(k: usize) -> Result<()> {
    if (1..=4).contains(&k) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("L-moment order {k} not in 1..=4")))
    }
}

/// `int_0^1 Q(p) F_k(p) dp` of an arbitrary quantile function.
pub fn lmoment_of<F: Fn(f64) -> Result<f64>>(q: F, k: usize) -> Result<f64> {
    check_order(k)?;
    let opts = UnitQuad { rel_tol: 1e-12, tail_tol: 1e-12, ..UnitQuad::default() };
    integrate_unit(|p| Ok(q(p)? * lmoment_weight(k, p)), opts)
}

pub fn lmoment_of_basis(b: &BasisFunction, k: usize) -> Result<f64> {
    check_order(k)?;
    if b.is_constant() {
        return Ok(if k == 1 { 1.0 } else { 0.0 });
    }
    lmoment_of(|p| b.eval(p), k)
}

/// L-moments of a model, by linearity in `theta`.
pub fn model_lmoments(m: &FittedModel, order: usize) -> Result<Vec<f64>> {
    check_order(order)?;
    (1..=order)
        .map(|k| {
            let mut s = 0.0;
            for (b, &t) in m.catalog().iter().zip(m.theta()) {
                if t != 0.0 {
                    s += t * lmoment_of_basis(b, k)?;
                }
            }
            Ok(s)
        })
        .collect()
}

/// Unbiased sample L-moments `l_1..l_m` from probability-weighted moments.
pub fn sample_lmoments(sample: &[f64], m: usize) -> Result<Vec<f64>> {
    check_order(m)?;
    let n = sample.len();
    if n < m {
        return Err(Error::InvalidInput(format!("{m} L-moments need at least {m} observations, got {n}")));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    // b_r = n^-1 sum_j C(j-1, r) / C(n-1, r) x_(j)
    let mut b = [0.0; 4];
    for (j, &v) in x.iter().enumerate() {
        let mut c = 1.0;
        for (r, br) in b.iter_mut().enumerate().take(m) {
            if r > 0 {
                c *= (j as f64 - (r - 1) as f64) / ((n - 1) as f64 - (r - 1) as f64);
            }
            if c == 0.0 {
                break;
            }
            *br += c * v;
        }
    }
    let b: Vec<f64> = b.iter().map(|v| v / n as f64).collect();
    let l = [
        b[0],
        2.0 * b[1] - b[0],
        6.0 * b[2] - 6.0 * b[1] + b[0],
        20.0 * b[3] - 30.0 * b[2] + 12.0 * b[1] - b[0],
    ];
    Ok(l[..m].to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GofReport {
    /// Weighted mean squared error, normalized by the weight total.
    pub wmse: f64,
    pub mae: f64,
    pub ks: f64,
    pub llk: f64,
    /// Set when some sample point had no finite log-density.
    pub llk_degenerate: bool,
}

impl GofReport {
    /// `statistic,value` rows in the order WMSE, MAE, KS, LLK.
    pub fn to_csv(&self) -> String {
        let llk = if self.llk.is_finite() { crate::basis::fmt_f64(self.llk) } else { "-inf".into() };
        format!(
            "statistic,value\nWMSE,{}\nMAE,{}\nKS,{}\nLLK,{}\n",
            crate::basis::fmt_f64(self.wmse),
            crate::basis::fmt_f64(self.mae),
            crate::basis::fmt_f64(self.ks),
            llk
        )
    }
}

impl fmt::Display for GofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "WMSE {:.6e}", self.wmse)?;
        writeln!(f, "MAE  {:.6e}", self.mae)?;
        writeln!(f, "KS   {:.6e}", self.ks)?;
        write!(f, "LLK  {:.6e}", self.llk)?;
        if self.llk_degenerate {
            write!(f, " (density undefined at some points)")?;
        }
        Ok(())
    }
}

/// Fit statistics of `m` on `sample` at plotting positions `n / (N + 1)`.
/// `weights` default to one per observation and follow the sorted order.
pub fn gof(m: &FittedModel, sample: &[f64], weights: Option<&[f64]>) -> Result<GofReport> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::InvalidInput(format!("{} weights for {n} observations", w.len())));
        }
    }
    let mut y = sample.to_vec();
    y.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut sw, mut swe, mut sae) = (0.0, 0.0, 0.0);
    let mut ks: f64 = 0.0;
    let mut llk = 0.0;
    let mut degenerate = false;
    for (i, &v) in y.iter().enumerate() {
        let k = (i + 1) as f64;
        let g = m.evaluate(k / (nf + 1.0))?;
        let w = weights.map_or(1.0, |w| w[i]);
        sw += w;
        swe += w * (v - g).powi(2);
        sae += (v - g).abs();
        if !m.is_degenerate() {
            let u = m.inverse(v)?;
            ks = ks.max((k / nf - u).abs()).max(((k - 1.0) / nf - u).abs());
        }
        match m.density(v) {
            Ok(d) if d > 0.0 && d.is_finite() => llk += d.ln(),
            _ => degenerate = true,
        }
    }
    if m.is_degenerate() {
        ks = 1.0;
    }
    if degenerate {
        llk = f64::NEG_INFINITY;
    }
    Ok(GofReport { wmse: swe / sw, mae: sae / nf, ks: ks.min(1.0), llk, llk_degenerate: degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_normal, BasisKind};

    #[test]
    fn uniform_lmoments() {
        let u = BasisFunction::raw(BasisKind::Uniform).unwrap();
        assert!((lmoment_of_basis(&u, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((lmoment_of_basis(&u, 2).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!(lmoment_of_basis(&u, 3).unwrap().abs() < 1e-12);
        assert_eq!(lmoment_of_basis(&BasisFunction::constant(), 3).unwrap(), 0.0);
    }

    #[test]
    fn two_point_sample() {
        let l = sample_lmoments(&[1.0, 0.0], 2).unwrap();
        assert_eq!(l, vec![0.5, 0.5]);
        let c = sample_lmoments(&[3.0; 7], 4).unwrap();
        assert!((c[0] - 3.0).abs() < 1e-14 && c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn shift_distance() {
        let d = wasserstein(|p| Ok(p), |p| Ok(p + 0.37), |_| 1.0, 1.0).unwrap();
        assert!((d - 0.37).abs() < 1e-10);
        assert_eq!(wasserstein(|p| Ok(p), |p| Ok(p), |_| 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn exact_quantiles_have_zero_error() {
        let m = FittedModel::new(vec![BasisFunction::constant(), make_normal()], vec![1.0, 2.0]).unwrap();
        let n = 50;
        let s: Vec<f64> = (1..=n).map(|k| m.evaluate(k as f64 / (n as f64 + 1.0)).unwrap()).collect();
        let r = gof(&m, &s, None).unwrap();
        assert!(r.wmse < 1e-28 && r.mae < 1e-14);
        assert!(r.llk.is_finite());
    }
}
