use super::{LinearRow, RowKind};
use crate::basis::BasisFunction;
use crate::error::{Error, Result};
use crate::metrics::lmoment_of_basis;
use crate::quad::{integrate_unit, UnitQuad};

/// Tail mean `(1 - p)^-1 int_p^1 Q(s) ds` of one basis function, so that a
/// CVaR bound on the mixture is the linear row `sum theta_i cvar_i <= F`.
/// `p = 0` gives the mean.
pub fn cvar_coefficients(b: &BasisFunction, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    if b.is_constant() {
        return Ok(1.0);
    }
    let top = 1.0 - f64::EPSILON / 2.0;
    let opts = UnitQuad { rel_tol: 1e-11, tail_tol: 1e-11, ..UnitQuad::default() };
    // substitute s = 1 - (1 - p)(1 - t)
    integrate_unit(
        |t| {
            let s = (1.0 - (1.0 - p) * (1.0 - t)).clamp(f64::MIN_POSITIVE, top);
            b.eval(s)
        },
        opts,
    )
}

/// Rows bounding the L1 error of the first `m` L-moments.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxRows {
    /// Number of auxiliary variables appended after `theta`.
    pub n_aux: usize,
    /// Rows over `(theta, aux)`.
    pub rows: Vec<LinearRow>,
}

/// With `eps > 0`: auxiliary `u_k >= |L_k(theta) - target_k|` and
/// `sum u_k <= eps`. With `eps = 0` the rows are the equalities
/// `L_k(theta) = target_k` and no auxiliaries are introduced.
pub fn lmoment_constraint_rows(
    catalog: &[BasisFunction],
    m: usize,
    target: &[f64],
    eps: f64,
) -> Result<AuxRows> {
    if m == 0 || m > 4 {
        return Err(Error::Parameter(format!("L-moment order {m} not in 1..=4")));
    }
    if target.len() < m {
        return Err(Error::InvalidInput(format!("need {m} target L-moments, got {}", target.len())));
    }
    if !(eps >= 0.0) {
        return Err(Error::Parameter(format!("L-moment tolerance {eps}")));
    }
    let n = catalog.len();
    let mut lmat = vec![vec![0.0; n]; m];
    for (i, b) in catalog.iter().enumerate() {
        for (k, row) in lmat.iter_mut().enumerate() {
            row[i] = lmoment_of_basis(b, k + 1)?;
        }
    }
    if eps == 0.0 {
        let rows = (0..m)
            .map(|k| LinearRow { coef: lmat[k].clone(), rhs: target[k], kind: RowKind::Eq })
            .collect();
        return Ok(AuxRows { n_aux: 0, rows });
    }
    let mut rows = Vec::with_capacity(2 * m + 1);
    for k in 0..m {
        // L_k theta - u_k <= target_k  and  -L_k theta - u_k <= -target_k
        for sign in [1.0, -1.0] {
            let mut coef: Vec<f64> = lmat[k].iter().map(|v| sign * v).collect();
            coef.extend((0..m).map(|a| if a == k { -1.0 } else { 0.0 }));
            rows.push(LinearRow { coef, rhs: sign * target[k], kind: RowKind::Le });
        }
    }
    let mut coef = vec![0.0; n];
    coef.extend(std::iter::repeat(1.0).take(m));
    rows.push(LinearRow { coef, rhs: eps, kind: RowKind::Le });
    Ok(AuxRows { n_aux: m, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_exponential, make_normal};

    #[test]
    fn exponential_tail_mean() {
        let e = make_exponential();
        let ln3 = 3f64.ln();
        for &p in &[0.0, 0.3, 0.9, 0.99] {
            let oracle = (1.0 - (1.0 - p as f64).ln()) / ln3;
            let v = cvar_coefficients(&e, p).unwrap();
            assert!((v - oracle).abs() < 1e-9, "p={p} v={v} oracle={oracle}");
        }
        assert_eq!(cvar_coefficients(&BasisFunction::constant(), 0.4).unwrap(), 1.0);
    }

    #[test]
    fn tail_mean_dominates_quantile() {
        let b = make_normal();
        for k in 1..20 {
            let p = k as f64 / 20.0;
            assert!(cvar_coefficients(&b, p).unwrap() >= b.eval(p).unwrap());
        }
    }

    #[test]
    fn aux_system_shape() {
        let cat = vec![BasisFunction::constant(), make_normal()];
        let rows = lmoment_constraint_rows(&cat, 2, &[1.0, 0.5], 0.1).unwrap();
        assert_eq!(rows.n_aux, 2);
        assert_eq!(rows.rows.len(), 5);
        assert!(rows.rows.iter().all(|r| r.coef.len() == 4));
        let eq = lmoment_constraint_rows(&cat, 1, &[5.0], 0.0).unwrap();
        assert_eq!(eq.rows[0].coef[0], 1.0);
        assert!(eq.rows[0].coef[1].abs() < 1e-12);
        assert_eq!(eq.rows[0].kind, RowKind::Eq);
    }
}
