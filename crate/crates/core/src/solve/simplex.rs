//! Revised primal simplex for bounded-variable linear programs
//!
//! `min c'v  s.t.  A v = b,  l <= v <= u`,
//!
//! with a dense explicit basis inverse (the row count is small in every use
//! here) and a two-phase start from artificial variables. Pricing is
//! Dantzig's rule; after a run of degenerate pivots it switches to Bland's
//! rule until the objective moves again.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

pub(crate) struct Lp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct LpOut {
    #[allow(dead_code)]
    pub v: Vec<f64>,
    /// Simplex multipliers `B^-T c_B` of the equality rows.
    pub duals: DVector<f64>,
    pub objective: f64,
}

struct State {
    a: DMatrix<f64>,
    b: DVector<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    pivots: usize,
}

impl State {
    fn refactor(&mut self) -> Result<()> {
        let m = self.basis.len();
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[(i, self.basis[k])]);
        self.binv = bmat.try_inverse().ok_or(Error::Convergence("simplex basis factorization"))?;
        self.recompute_basic();
        Ok(())
    }

    fn recompute_basic(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.a.ncols() {
            if self.status[j] != Status::Basic && self.value[j] != 0.0 {
                rhs.axpy(-self.value[j], &self.a.column(j), 1.0);
            }
        }
        let xb = &self.binv * rhs;
        for (i, &j) in self.basis.iter().enumerate() {
            self.value[j] = xb[i];
        }
    }

    fn run(&mut self, cost: &[f64], max_iter: usize) -> Result<()> {
        let n = self.a.ncols();
        let m = self.basis.len();
        let cscale = cost.iter().fold(0.0f64, |s, c| s.max(c.abs())).max(1.0);
        let opt_tol = 1e-10 * cscale;
        let mut degenerate = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            let cb = DVector::from_fn(m, |i, _| cost[self.basis[i]]);
            let pi = self.binv.tr_mul(&cb);
            let reduced = self.a.tr_mul(&pi);
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..n {
                let d = cost[j] - reduced[j];
                let gain = match self.status[j] {
                    Status::Basic => continue,
                    Status::Lower if d < -opt_tol && self.upper[j] > self.lower[j] => -d,
                    Status::Upper if d > opt_tol && self.upper[j] > self.lower[j] => d,
                    _ => continue,
                };
                if bland {
                    enter = Some(j);
                    break;
                }
                if gain > best {
                    best = gain;
                    enter = Some(j);
                }
            }
            let Some(q) = enter else { return Ok(()) };
            let dir = if self.status[q] == Status::Lower { 1.0 } else { -1.0 };
            let alpha = &self.binv * self.a.column(q);
            // ratio test on the basic variables, then the entering bound flip
            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, Status)> = None;
            let mut leave_piv = 0.0;
            for i in 0..m {
                let g = dir * alpha[i];
                if g.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basis[i];
                let (limit, hit) = if g > 0.0 {
                    ((self.value[j] - self.lower[j]).max(0.0) / g, Status::Lower)
                } else {
                    ((self.upper[j] - self.value[j]).max(0.0) / -g, Status::Upper)
                };
                if !limit.is_finite() {
                    continue;
                }
                let tie = 1e-12 * step.abs().min(limit.abs()).max(1e-12);
                let take = if limit < step - tie {
                    true
                } else if limit <= step + tie {
                    match leave {
                        // prefer a pivot over a bound flip of equal length
                        None => true,
                        Some((pos, _)) if bland => j < self.basis[pos],
                        Some(_) => g.abs() > leave_piv,
                    }
                } else {
                    false
                };
                if take {
                    step = step.min(limit);
                    leave = Some((i, hit));
                    leave_piv = g.abs();
                }
            }
            if step.is_infinite() {
                return Err(Error::Unbounded);
            }
            if step <= 1e-14 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.value[q] += dir * step;
            for i in 0..m {
                let j = self.basis[i];
                self.value[j] -= dir * step * alpha[i];
            }
            match leave {
                None => {
                    // bound flip
                    self.status[q] = if self.status[q] == Status::Lower { Status::Upper } else { Status::Lower };
                    self.value[q] = if self.status[q] == Status::Lower { self.lower[q] } else { self.upper[q] };
                }
                Some((r, hit)) => {
                    let out = self.basis[r];
                    self.status[out] = hit;
                    self.value[out] = if hit == Status::Lower { self.lower[out] } else { self.upper[out] };
                    self.basis[r] = q;
                    self.status[q] = Status::Basic;
                    let piv = alpha[r];
                    let row: Vec<f64> = (0..m).map(|k| self.binv[(r, k)] / piv).collect();
                    for i in 0..m {
                        if i == r {
                            continue;
                        }
                        let f = alpha[i];
                        if f != 0.0 {
                            for k in 0..m {
                                self.binv[(i, k)] -= f * row[k];
                            }
                        }
                    }
                    for k in 0..m {
                        self.binv[(r, k)] = row[k];
                    }
                    self.pivots += 1;
                    if self.pivots % REFACTOR_EVERY == 0 {
                        self.refactor()?;
                    }
                }
            }
        }
        Err(Error::IterationLimit("simplex"))
    }
}

/// Solve `lp` starting with every structural variable at `start` (which must
/// lie on a finite bound of each variable).
pub(crate) fn solve_lp(lp: &Lp, start: &[f64]) -> Result<LpOut> {
    let (m, n) = lp.a.shape();
    assert_eq!(start.len(), n);
    let mut status = Vec::with_capacity(n + m);
    for j in 0..n {
        let s = if start[j] == lp.lower[j] {
            Status::Lower
        } else if start[j] == lp.upper[j] {
            Status::Upper
        } else {
            return Err(Error::InvalidInput("simplex start must sit on a bound".into()));
        };
        status.push(s);
    }
    // residual of the rows with every structural variable nonbasic
    let mut resid = lp.b.clone();
    for j in 0..n {
        if start[j] != 0.0 {
            resid.axpy(-start[j], &lp.a.column(j), 1.0);
        }
    }
    let mut a = DMatrix::zeros(m, n + m);
    a.columns_mut(0, n).copy_from(&lp.a);
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut value = start.to_vec();
    let mut basis = Vec::with_capacity(m);
    let mut binv = DMatrix::zeros(m, m);
    for i in 0..m {
        let s = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
        a[(i, n + i)] = s;
        binv[(i, i)] = s;
        lower.push(0.0);
        upper.push(f64::INFINITY);
        value.push(resid[i].abs());
        status.push(Status::Basic);
        basis.push(n + i);
    }
    let mut st = State { a, b: lp.b.clone(), lower, upper, value, status, basis, binv, pivots: 0 };
    let max_iter = 50 * (n + m) + 1000;

    let mut phase1 = vec![0.0; n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = 1.0;
    }
    st.run(&phase1, max_iter)?;
    let infeas: f64 = (n..n + m).map(|j| st.value[j].abs()).sum();
    let scale = 1.0 + lp.b.amax() + start.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if infeas > 1e-8 * scale {
        return Err(Error::Infeasible);
    }
    for j in n..n + m {
        st.upper[j] = 0.0;
        if st.status[j] != Status::Basic {
            st.status[j] = Status::Lower;
            st.value[j] = 0.0;
        }
    }
    st.refactor()?;

    let mut cost = lp.cost.clone();
    cost.extend(std::iter::repeat(0.0).take(m));
    st.run(&cost, max_iter)?;
    st.refactor()?;
    let cb = DVector::from_fn(m, |i, _| cost[st.basis[i]]);
    let duals = st.binv.tr_mul(&cb);
    let v: Vec<f64> = st.value[..n].to_vec();
    let objective = v.iter().zip(&lp.cost).map(|(v, c)| v * c).sum();
    Ok(LpOut { v, duals, objective })
}
