//! Lawson–Hanson active-set least squares with a mix of free and
//! sign-constrained variables and an optional linear term:
//!
//! `min 0.5 |b - A x|^2 + c'x  s.t.  x_i >= 0 for i in the bounded set`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns whose component orthogonal to the passive set is below this
/// fraction of their norm are treated as linearly dependent.
const DEPENDENCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(crate) struct NnlsOut {
    pub x: DVector<f64>,
    /// Largest violation of the sign conditions on the gradient, relative to
    /// `|A| |b|`.
    pub kkt: f64,
}

/// Least squares on the columns in `cols`; `None` when they are dependent.
fn solve_subset(a: &DMatrix<f64>, b: &DVector<f64>, lin: Option<&DVector<f64>>, cols: &[usize]) -> Option<Vec<f64>> {
    if cols.is_empty() {
        return Some(vec![]);
    }
    let sub = a.select_columns(cols);
    let k = cols.len();
    let qr = sub.clone().qr();
    let r = qr.r();
    for i in 0..k {
        let norm = sub.column(i).norm();
        if !(r[(i, i)].abs() > DEPENDENCE_TOL * norm) {
            return None;
        }
    }
    // normal equations through R: R'R x = A'b - c
    let mut rhs = sub.tr_mul(b);
    if let Some(c) = lin {
        for (i, &j) in cols.iter().enumerate() {
            rhs[i] -= c[j];
        }
    }
    let rt = r.transpose();
    let z = rt.solve_lower_triangular(&rhs)?;
    let x = r.solve_upper_triangular(&z)?;
    Some(x.iter().copied().collect())
}

pub(crate) fn nnls(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lin: Option<&DVector<f64>>,
    bounded: &[bool],
) -> Result<NnlsOut> {
    let n = a.ncols();
    assert_eq!(bounded.len(), n);
    let col_norm_max = (0..n).map(|i| a.column(i).norm()).fold(0.0, f64::max);
    let lin_max = lin.map_or(0.0, |c| c.amax());
    let scale = col_norm_max * b.norm() + lin_max + 1e-300;
    let tol = 1e-11 * scale;

    let mut passive: Vec<usize> = (0..n).filter(|&i| !bounded[i]).collect();
    let mut x = DVector::zeros(n);
    if !passive.is_empty() {
        let s = solve_subset(a, b, lin, &passive).ok_or(Error::RankDeficient)?;
        for (&j, v) in passive.iter().zip(s) {
            x[j] = v;
        }
    }
    let mut in_passive: Vec<bool> = (0..n).map(|i| !bounded[i]).collect();
    let mut blocked = vec![false; n];
    let gradient = |x: &DVector<f64>| -> DVector<f64> {
        let r = b - a * x;
        let mut w = a.tr_mul(&r);
        if let Some(c) = lin {
            w -= c;
        }
        w
    };

    let max_outer = 10 * n + 100;
    let mut w = gradient(&x);
    for _ in 0..max_outer {
        let entering = (0..n)
            .filter(|&i| bounded[i] && !in_passive[i] && !blocked[i] && w[i] > tol)
            .max_by(|&i, &k| w[i].total_cmp(&w[k]));
        let Some(t) = entering else {
            let kkt = kkt_violation(&w, &x, bounded, scale);
            return Ok(NnlsOut { x, kkt });
        };
        passive.push(t);
        in_passive[t] = true;

        let mut first = true;
        loop {
            let Some(s) = solve_subset(a, b, lin, &passive) else {
                if first {
                    passive.pop();
                    in_passive[t] = false;
                    blocked[t] = true;
                    break;
                }
                return Err(Error::Convergence("non-negative least squares"));
            };
            if first && s[passive.len() - 1] <= 0.0 {
                // entering column cannot move off its bound: numerical tie
                passive.pop();
                in_passive[t] = false;
                blocked[t] = true;
                break;
            }
            first = false;
            let feasible = passive.iter().zip(&s).all(|(&j, &v)| !bounded[j] || v > 0.0);
            if feasible {
                for (&j, &v) in passive.iter().zip(&s) {
                    x[j] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &v) in passive.iter().zip(&s) {
                if bounded[j] && v <= 0.0 {
                    let step = x[j] / (x[j] - v);
                    alpha = alpha.min(step);
                }
            }
            for (&j, &v) in passive.iter().zip(&s) {
                x[j] += alpha * (v - x[j]);
            }
            let mut keep = Vec::with_capacity(passive.len());
            for &j in &passive {
                if bounded[j] && x[j] <= 1e-15 * (1.0 + x[j].abs()) {
                    x[j] = 0.0;
                    in_passive[j] = false;
                } else {
                    keep.push(j);
                }
            }
            passive = keep;
        }
        w = gradient(&x);
    }
    Err(Error::IterationLimit("non-negative least squares"))
}

/// Largest stationarity or sign violation relative to `|A| |b|`.
fn kkt_violation(w: &DVector<f64>, x: &DVector<f64>, bounded: &[bool], scale: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let v = if bounded[i] && x[i] == 0.0 { w[i].max(0.0) } else { w[i].abs() };
        worst = worst.max(v / scale);
    }
    worst
}
