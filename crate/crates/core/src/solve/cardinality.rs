//! Best-first branch-and-bound for `|{i >= 1 : theta_i != 0}| <= C`.
//!
//! The mixed-integer form uses binaries `v_i` with `0 <= theta_i <= u_i v_i`
//! and `sum v_i <= C`. Each node fixes some `v_i` to one (forced) or zero
//! (excluded); its continuous relaxation replaces the remaining binaries by
//! `theta_i / u_i`. Nodes are evaluated in fixed-size batches, possibly in
//! parallel, and their results are consumed in pop order, so the search is
//! deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};

use super::{
    assemble, compile, lad, loss_of, solve_l2, support_of, validate, ConstraintSet, ErrorNorm,
    FitResult, LinearRow, RowKind, System,
};
use crate::design::DesignProblem;
use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Clone, Copy, Debug)]
pub struct BranchOptions {
    pub node_limit: usize,
    /// Nodes popped and evaluated together.
    pub batch: usize,
    pub exec: Exec,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions { node_limit: 100_000, batch: 8, exec: Exec::default() }
    }
}

struct Ctx<'a> {
    prob: &'a DesignProblem,
    sys: System,
    norm: ErrorNorm,
    whitened: Option<(DMatrix<f64>, DVector<f64>)>,
    upper: Vec<f64>,
}

#[derive(Clone, Debug)]
struct Sol {
    theta: Vec<f64>,
    loss: f64,
    kkt: f64,
}

impl Ctx<'_> {
    fn run(&self, cols: &[usize], sub: &System) -> Result<(DVector<f64>, f64)> {
        match &self.whitened {
            Some((a, b)) => solve_l2(&a.select_columns(cols), b, None, sub),
            None => lad::solve_l1(&self.prob.select_columns(cols), None, sub),
        }
    }

    /// Fit on `cols` (which always contain the intercept) under the bounds
    /// `theta_i <= u_i` and, when given, the relaxed budget on the columns
    /// that are not forced.
    fn solve(&self, cols: &[usize], forced: &[bool], budget: Option<f64>) -> Result<Sol> {
        let k = cols.len();
        let mut sub = self.sys.select(cols);
        let (mut z, mut kkt) = self.run(cols, &sub)?;
        let within = |z: &DVector<f64>| {
            let mut used = 0.0;
            for (pos, &i) in cols.iter().enumerate() {
                if i == 0 {
                    continue;
                }
                if z[pos] > self.upper[i] {
                    return false;
                }
                if !forced[i] {
                    used += z[pos] / self.upper[i];
                }
            }
            budget.is_none_or(|b| used <= b * (1.0 + 1e-12))
        };
        if !within(&z) {
            let width = k + sub.n_aux;
            for (pos, &i) in cols.iter().enumerate() {
                if i == 0 {
                    continue;
                }
                let mut coef = vec![0.0; width];
                coef[pos] = 1.0;
                sub.rows.push(LinearRow { coef, rhs: self.upper[i], kind: RowKind::Le });
            }
            if let Some(b) = budget {
                let mut coef = vec![0.0; width];
                for (pos, &i) in cols.iter().enumerate() {
                    if i != 0 && !forced[i] {
                        coef[pos] = 1.0 / self.upper[i];
                    }
                }
                sub.rows.push(LinearRow { coef, rhs: b, kind: RowKind::Le });
            }
            (z, kkt) = self.run(cols, &sub)?;
        }
        let mut theta = vec![0.0; self.prob.n_coef()];
        for (pos, &i) in cols.iter().enumerate() {
            theta[i] = z[pos];
        }
        let loss = loss_of(self.prob, &theta, self.norm)?;
        Ok(Sol { theta, loss, kkt })
    }
}

struct Node {
    bound: f64,
    seq: usize,
    excluded: Vec<bool>,
    forced: Vec<bool>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

enum Outcome {
    Leaf(Sol),
    Relaxed(Sol),
    Pruned,
}

pub fn fit_cardinality(prob: &DesignProblem, cons: &ConstraintSet, norm: ErrorNorm) -> Result<FitResult> {
    fit_cardinality_with(prob, cons, norm, BranchOptions::default())
}

pub fn fit_cardinality_with(
    prob: &DesignProblem,
    cons: &ConstraintSet,
    norm: ErrorNorm,
    opts: BranchOptions,
) -> Result<FitResult> {
    validate(prob, cons)?;
    let c = cons
        .cardinality
        .ok_or_else(|| Error::Parameter("cardinality bound missing".into()))?;
    let n = prob.n_coef();
    let sys = compile(prob, cons)?;
    let whitened = match norm {
        ErrorNorm::L2 => Some(prob.weights.whiten(&prob.x, &prob.y)?),
        ErrorNorm::L1 => {
            if prob.weights.diagonal().is_none() {
                return Err(Error::InvalidInput("L1 error needs diagonal weights".into()));
            }
            None
        }
    };
    let mut ctx = Ctx { prob, sys, norm, whitened, upper: vec![f64::INFINITY; n] };
    let all: Vec<usize> = (0..n).collect();
    let none = vec![false; n];
    let root = ctx.solve(&all, &none, None)?;
    let user_bounds = cons.upper_bounds.is_some();
    if !user_bounds && support_of(&root.theta).len() <= c {
        return finish(prob, root, norm, true);
    }
    ctx.upper = match &cons.upper_bounds {
        Some(u) => u.clone(),
        None => {
            let top = root.theta[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            vec![10.0 * top.max(f64::MIN_POSITIVE); n]
        }
    };
    for _ in 0..60 {
        let (sol, optimal) = search(&ctx, c, opts)?;
        let binding = (1..n).any(|i| sol.theta[i] >= 0.99 * ctx.upper[i]);
        if user_bounds || !binding {
            return finish(prob, sol, norm, optimal);
        }
        ctx.upper.iter_mut().for_each(|u| *u *= 2.0);
    }
    Err(Error::Convergence("cardinality bound enlargement"))
}

fn finish(prob: &DesignProblem, sol: Sol, norm: ErrorNorm, optimal: bool) -> Result<FitResult> {
    let mut fit = assemble(prob, sol.theta, norm, sol.kkt)?;
    fit.optimal = optimal;
    Ok(fit)
}

fn cols_of(n: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    std::iter::once(0).chain((1..n).filter(|&i| keep(i))).collect()
}

fn greedy(ctx: &Ctx, c: usize, exec: Exec) -> Result<Option<Sol>> {
    let n = ctx.prob.n_coef();
    let none = vec![false; n];
    let mut chosen: Vec<usize> = vec![0];
    let mut best = match ctx.solve(&chosen, &none, None) {
        Ok(s) => Some(s),
        Err(Error::Infeasible) => None,
        Err(e) => return Err(e),
    };
    for _ in 0..c {
        let candidates: Vec<usize> = (1..n).filter(|i| !chosen.contains(i)).collect();
        let sols = exec.map(&candidates, |&i| {
            let mut cols = chosen.clone();
            cols.push(i);
            cols.sort_unstable();
            ctx.solve(&cols, &none, None)
        });
        let mut step: Option<(usize, Sol)> = None;
        for (&i, s) in candidates.iter().zip(sols) {
            let s = match s {
                Ok(s) => s,
                Err(Error::Infeasible) => continue,
                Err(e) => return Err(e),
            };
            if step.as_ref().is_none_or(|(_, b)| s.loss < b.loss) {
                step = Some((i, s));
            }
        }
        match step {
            Some((i, s)) if best.as_ref().is_none_or(|b| s.loss < b.loss) => {
                chosen.push(i);
                chosen.sort_unstable();
                best = Some(s);
            }
            _ => break,
        }
    }
    Ok(best)
}

fn search(ctx: &Ctx, c: usize, opts: BranchOptions) -> Result<(Sol, bool)> {
    let n = ctx.prob.n_coef();
    let mut incumbent = greedy(ctx, c, opts.exec)?;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: f64::NEG_INFINITY, seq, excluded: vec![false; n], forced: vec![false; n] });
    let mut nodes = 0usize;
    let improves = |bound: f64, inc: &Option<Sol>| match inc {
        None => true,
        Some(s) => bound < s.loss - 1e-12 * s.loss.abs() - 1e-300,
    };

    while !heap.is_empty() {
        if nodes >= opts.node_limit {
            let sol = incumbent.ok_or(Error::IterationLimit("branch-and-bound"))?;
            return Ok((sol, false));
        }
        let mut batch = Vec::with_capacity(opts.batch);
        while batch.len() < opts.batch {
            match heap.pop() {
                Some(node) if improves(node.bound, &incumbent) => batch.push(node),
                // every remaining node has an equal or larger bound
                Some(_) => heap.clear(),
                None => break,
            }
        }
        let outcomes = opts.exec.map(&batch, |node| -> Result<Outcome> {
            let n_forced = node.forced.iter().filter(|&&f| f).count();
            let free = (1..n).filter(|&i| !node.excluded[i] && !node.forced[i]).count();
            let res = if n_forced == c {
                ctx.solve(&cols_of(n, |i| node.forced[i]), &node.forced, None).map(Outcome::Leaf)
            } else if n_forced + free <= c {
                ctx.solve(&cols_of(n, |i| !node.excluded[i]), &node.forced, None).map(Outcome::Leaf)
            } else {
                let budget = (c - n_forced) as f64;
                ctx.solve(&cols_of(n, |i| !node.excluded[i]), &node.forced, Some(budget))
                    .map(Outcome::Relaxed)
            };
            match res {
                Err(Error::Infeasible) => Ok(Outcome::Pruned),
                other => other,
            }
        });
        for (node, outcome) in batch.into_iter().zip(outcomes) {
            nodes += 1;
            match outcome? {
                Outcome::Pruned => {}
                Outcome::Leaf(sol) => {
                    if improves(sol.loss, &incumbent) {
                        incumbent = Some(sol);
                    }
                }
                Outcome::Relaxed(sol) => {
                    if !improves(sol.loss, &incumbent) {
                        continue;
                    }
                    if support_of(&sol.theta).len() <= c {
                        incumbent = Some(sol);
                        continue;
                    }
                    let branch = (1..n)
                        .filter(|&i| !node.excluded[i] && !node.forced[i])
                        .max_by(|&i, &k| {
                            (sol.theta[i] / ctx.upper[i]).total_cmp(&(sol.theta[k] / ctx.upper[k])).then(k.cmp(&i))
                        })
                        .expect("a free column carries the excess support");
                    let mut forced = node.forced.clone();
                    forced[branch] = true;
                    seq += 1;
                    heap.push(Node { bound: sol.loss, seq, excluded: node.excluded.clone(), forced });
                    let mut excluded = node.excluded;
                    excluded[branch] = true;
                    seq += 1;
                    heap.push(Node { bound: sol.loss, seq, excluded, forced: node.forced });
                }
            }
        }
    }
    let sol = incumbent.ok_or(Error::Infeasible)?;
    Ok((sol, true))
}
