//! Dual active-set method of Goldfarb and Idnani for strictly convex QPs:
//!
//! `min 0.5 x'Gx + a'x  s.t.  e_k'x = f_k,  c_k'x >= d_k`.
//!
//! The factor `J` satisfies `J J' = G^-1`; with the normals of the active
//! constraints in `N`, `J'N = [R; 0]` for upper triangular `R`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub normal: DVector<f64>,
    pub rhs: f64,
    pub equality: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct QpOut {
    pub x: DVector<f64>,
    /// Multiplier of each constraint (zero when inactive).
    pub multipliers: Vec<f64>,
}

struct Factor {
    j: DMatrix<f64>,
    r: DMatrix<f64>,
    q: usize,
}

impl Factor {
    fn add(&mut self, d: &mut DVector<f64>) {
        let n = d.len();
        let q = self.q;
        for k in (q + 1..n).rev() {
            let (c, s) = givens(d[k - 1], d[k]);
            if s == 0.0 {
                continue;
            }
            d[k - 1] = c * d[k - 1] + s * d[k];
            d[k] = 0.0;
            rotate_columns(&mut self.j, k - 1, k, c, s);
        }
        for i in 0..=q {
            self.r[(i, q)] = d[i];
        }
        self.q += 1;
    }

    fn drop(&mut self, l: usize) {
        let q = self.q;
        for col in l..q - 1 {
            for i in 0..q {
                self.r[(i, col)] = self.r[(i, col + 1)];
            }
        }
        for i in 0..q {
            self.r[(i, q - 1)] = 0.0;
        }
        for k in l..q - 1 {
            let (c, s) = givens(self.r[(k, k)], self.r[(k + 1, k)]);
            if s == 0.0 {
                continue;
            }
            for col in k..q - 1 {
                let (u, v) = (self.r[(k, col)], self.r[(k + 1, col)]);
                self.r[(k, col)] = c * u + s * v;
                self.r[(k + 1, col)] = -s * u + c * v;
            }
            rotate_columns(&mut self.j, k, k + 1, c, s);
        }
        self.q -= 1;
    }

    fn solve_r(&self, d: &DVector<f64>) -> Vec<f64> {
        let q = self.q;
        let mut r = vec![0.0; q];
        for i in (0..q).rev() {
            let mut s = d[i];
            for k in i + 1..q {
                s -= self.r[(i, k)] * r[k];
            }
            r[i] = s / self.r[(i, i)];
        }
        r
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0);
    }
    let h = a.hypot(b);
    (a / h, b / h)
}

fn rotate_columns(m: &mut DMatrix<f64>, a: usize, b: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (u, v) = (m[(i, a)], m[(i, b)]);
        m[(i, a)] = c * u + s * v;
        m[(i, b)] = -s * u + c * v;
    }
}

/// Solve the QP. `g` must be positive definite.
pub(crate) fn solve_qp(g: &DMatrix<f64>, a: &DVector<f64>, cons: &[Constraint]) -> Result<QpOut> {
    let n = g.nrows();
    let chol = g.clone().cholesky().ok_or(Error::RankDeficient)?;
    let lt = chol.l().transpose();
    let j = lt
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::RankDeficient)?;
    let mut x = -chol.solve(a);
    let mut f = Factor { j, r: DMatrix::zeros(n, n), q: 0 };
    // active constraint indices, their orientation (+1 or -1) and multipliers
    let mut active: Vec<usize> = Vec::new();
    let mut sign: Vec<f64> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut is_active = vec![false; cons.len()];

    let norms: Vec<f64> = cons.iter().map(|c| c.normal.norm()).collect();
    let max_iter = 50 * (n + cons.len()) + 100;
    let mut iter = 0;
    let mut skipped_eq = vec![false; cons.len()];

    loop {
        // pick the next constraint: pending equalities first, then the most
        // violated inequality
        let scale_x = 1.0 + x.amax();
        let slack = |k: usize, x: &DVector<f64>| cons[k].normal.dot(x) - cons[k].rhs;
        let tol = |k: usize| 1e-10 * (cons[k].rhs.abs() + norms[k] * scale_x) + 1e-300;
        let mut pick = None;
        for k in 0..cons.len() {
            if cons[k].equality && !is_active[k] && !skipped_eq[k] {
                pick = Some(k);
                break;
            }
        }
        if pick.is_none() {
            let mut worst = 0.0;
            for k in 0..cons.len() {
                if cons[k].equality || is_active[k] || norms[k] == 0.0 {
                    continue;
                }
                let s = slack(k, &x);
                if s < -tol(k) {
                    let v = s / norms[k];
                    if v < worst {
                        worst = v;
                        pick = Some(k);
                    }
                }
            }
        }
        let Some(p) = pick else { break };

        let mut sp = slack(p, &x);
        let orient = if cons[p].equality && sp > 0.0 { -1.0 } else { 1.0 };
        let np = &cons[p].normal * orient;
        sp *= orient;
        let mut u_plus = 0.0;
        loop {
            iter += 1;
            if iter > max_iter {
                return Err(Error::IterationLimit("quadratic program"));
            }
            let mut d = f.j.tr_mul(&np);
            let q = f.q;
            let d2_sq: f64 = d.rows(q, n - q).norm_squared();
            let dependent = d2_sq <= 1e-20 * d.norm_squared();
            let z = if dependent {
                DVector::zeros(n)
            } else {
                f.j.columns(q, n - q) * d.rows(q, n - q)
            };
            let r = f.solve_r(&d);
            // partial step: largest step keeping inequality multipliers >= 0
            let mut t1 = f64::INFINITY;
            let mut l = usize::MAX;
            for (pos, &k) in active.iter().enumerate() {
                if !cons[k].equality && r[pos] > 0.0 {
                    let t = u[pos] / r[pos];
                    if t < t1 {
                        t1 = t;
                        l = pos;
                    }
                }
            }
            let t2 = if dependent { f64::INFINITY } else { -sp / z.dot(&np) };
            if t2.is_infinite() && cons[p].equality && sp.abs() <= tol(p) {
                // redundant equality
                skipped_eq[p] = true;
                break;
            }
            if t1.is_infinite() && t2.is_infinite() {
                return Err(Error::Infeasible);
            }
            if t2.is_infinite() {
                for (pos, ui) in u.iter_mut().enumerate() {
                    *ui -= t1 * r[pos];
                }
                u_plus += t1;
                let k = active.remove(l);
                sign.remove(l);
                u.remove(l);
                is_active[k] = false;
                f.drop(l);
                continue;
            }
            let t = t1.min(t2);
            x += &z * t;
            for (pos, ui) in u.iter_mut().enumerate() {
                *ui -= t * r[pos];
            }
            u_plus += t;
            if t2 <= t1 {
                f.add(&mut d);
                active.push(p);
                sign.push(orient);
                u.push(u_plus);
                is_active[p] = true;
                break;
            }
            sp = np.dot(&x) - cons[p].rhs * orient;
            let k = active.remove(l);
            sign.remove(l);
            u.remove(l);
            is_active[k] = false;
            f.drop(l);
        }
    }
    let mut multipliers = vec![0.0; cons.len()];
    for ((&k, &s), &m) in active.iter().zip(&sign).zip(&u) {
        multipliers[k] = s * m;
    }
    Ok(QpOut { x, multipliers })
}
