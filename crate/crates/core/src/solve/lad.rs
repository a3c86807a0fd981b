//! Weighted LAD through the dual of the split-variable linear program.
//!
//! Primal: `min sum_j w_j |y_j - x_j'z| + c'z` subject to the system rows and
//! sign restrictions. Writing `|r| = max_{|d| <= w} d r` gives the dual
//!
//! `min -y'd + h'lambda + e'(mu+ - mu-)`
//! `s.t. X'd - G'lambda - E'(mu+ - mu-) + s = c`,
//!
//! with `d` boxed by the weights, `lambda, mu+, mu-, s >= 0` and one slack
//! `s_i` per sign-restricted variable. The dual has one row per coefficient,
//! so its bases are tiny even for large samples. The primal solution is the
//! negated simplex multiplier vector.

use nalgebra::{DMatrix, DVector};

use super::simplex::{solve_lp, Lp};
use super::{nnls, RowKind, System};
use crate::design::DesignProblem;
use crate::error::{Error, Result};

/// Returns `z` and the relative duality gap.
pub(crate) fn solve_l1(
    prob: &DesignProblem,
    lin: Option<&DVector<f64>>,
    sys: &System,
) -> Result<(DVector<f64>, f64)> {
    let w = prob
        .weights
        .diagonal()
        .ok_or_else(|| Error::InvalidInput("L1 error needs diagonal weights".into()))?;
    let x = &prob.x;
    let y = &prob.y;
    let (nobs, nt) = x.shape();
    let n = sys.n_total();

    // split rows into <= and = forms over z
    let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut eq: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &sys.rows {
        match r.kind {
            RowKind::Le => ineq.push((r.coef.clone(), r.rhs)),
            RowKind::Ge => ineq.push((r.coef.iter().map(|v| -v).collect(), -r.rhs)),
            RowKind::Eq => eq.push((r.coef.clone(), r.rhs)),
        }
    }
    let n_bounded = sys.bounded.iter().filter(|&&b| b).count();
    let ncols = nobs + ineq.len() + 2 * eq.len() + n_bounded;
    let mut a = DMatrix::zeros(n, ncols);
    let mut cost = Vec::with_capacity(ncols);
    let mut lower = Vec::with_capacity(ncols);
    let mut upper = Vec::with_capacity(ncols);
    for j in 0..nobs {
        for i in 0..nt {
            a[(i, j)] = x[(j, i)];
        }
        cost.push(-y[j]);
        lower.push(-w[j]);
        upper.push(w[j]);
    }
    let mut col = nobs;
    for (g, h) in &ineq {
        for i in 0..n {
            a[(i, col)] = -g[i];
        }
        cost.push(*h);
        lower.push(0.0);
        upper.push(f64::INFINITY);
        col += 1;
    }
    for (e, f) in &eq {
        for sign in [1.0, -1.0] {
            for i in 0..n {
                a[(i, col)] = -sign * e[i];
            }
            cost.push(sign * f);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            col += 1;
        }
    }
    for (i, &b) in sys.bounded.iter().enumerate() {
        if b {
            a[(i, col)] = 1.0;
            cost.push(0.0);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            col += 1;
        }
    }
    let b = match lin {
        Some(c) => c.clone(),
        None => DVector::zeros(n),
    };

    // start each d_j at the bound matching the sign of a least-squares residual
    let theta0 = nnls::nnls(x, y, None, &sys.bounded[..nt])
        .map(|o| o.x)
        .unwrap_or_else(|_| DVector::zeros(nt));
    let r0 = y - x * &theta0;
    let mut start = vec![0.0; ncols];
    for j in 0..nobs {
        start[j] = if r0[j] >= 0.0 { w[j] } else { -w[j] };
    }
    let lp = Lp { a, b: b.clone(), cost, lower, upper };
    let out = match solve_lp(&lp, &start) {
        Ok(o) => o,
        // an unbounded dual means the primal constraints cannot be met
        Err(Error::Unbounded) => return Err(Error::Infeasible),
        Err(e) => return Err(e),
    };
    let mut z = -&out.duals;
    // the duals carry rounding noise of either sign on bounded coefficients
    for (i, &bnd) in sys.bounded.iter().enumerate() {
        if bnd {
            z[i] = z[i].max(0.0);
        }
    }

    let r = y - x * z.rows(0, nt);
    let primal: f64 = w.iter().zip(r.iter()).map(|(w, r)| w * r.abs()).sum::<f64>() + b.dot(&z);
    let scale = 1.0 + primal.abs() + out.objective.abs();
    let gap = (primal + out.objective).abs() / scale;
    if gap > 1e-7 {
        return Err(Error::Convergence("least absolute deviation simplex"));
    }
    Ok((z, gap))
}
