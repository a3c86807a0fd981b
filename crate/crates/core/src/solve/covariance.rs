use nalgebra::DMatrix;

use super::FitResult;
use crate::design::{DesignProblem, OrderStatCov, Weights};
use crate::error::{Error, Result};

/// Something that can form `A' C A` for a symmetric `C`.
pub trait Sandwich {
    fn dim(&self) -> usize;
    fn sandwich(&self, a: &DMatrix<f64>) -> DMatrix<f64>;
}

impl Sandwich for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn sandwich(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        a.transpose() * self * a
    }
}

impl Sandwich for OrderStatCov {
    fn dim(&self) -> usize {
        self.len()
    }

    fn sandwich(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        OrderStatCov::sandwich(self, a)
    }
}

/// `H = (X'WX)^-1 X'W C W X (X'WX)^-1`, the limiting covariance of
/// `sqrt(N) (theta_hat - theta)` for the unconstrained weighted estimator.
pub fn asymptotic_covariance(prob: &DesignProblem, c: &dyn Sandwich, w: &Weights) -> Result<DMatrix<f64>> {
    let j = prob.n_obs();
    if c.dim() != j || w.len() != j {
        return Err(Error::InvalidInput("covariance and weights must match the design rows".into()));
    }
    let wx = w.apply(&prob.x);
    let bread = prob.x.tr_mul(&wx);
    let chol = bread.cholesky().ok_or(Error::RankDeficient)?;
    let binv = chol.inverse();
    let meat = c.sandwich(&wx);
    let h = &binv * meat * &binv;
    Ok((&h + h.transpose()) * 0.5)
}

/// `H / N` with the order-statistic covariance evaluated at the fitted
/// density, `f(G^-1(p_j)) = 1 / G'(p_j)`.
pub fn standard_errors(prob: &DesignProblem, fit: &FitResult) -> Result<DMatrix<f64>> {
    let catalog = prob
        .catalog
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("standard errors need the basis catalog".into()))?;
    let mut density = Vec::with_capacity(prob.n_obs());
    for &p in &prob.p {
        let mut slope = 0.0;
        for (b, &t) in catalog.iter().zip(&fit.theta) {
            if t != 0.0 {
                slope += t * b.derivative(p)?;
            }
        }
        if !(slope > 0.0) {
            return Err(Error::Degenerate(format!("flat fitted quantile at level {p}")));
        }
        density.push(1.0 / slope);
    }
    let cov = OrderStatCov::new(&prob.p, &density)?;
    let h = asymptotic_covariance(prob, &cov, &prob.weights)?;
    Ok(h / prob.sample_size as f64)
}
