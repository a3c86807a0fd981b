use nalgebra::DVector;

use super::{assemble, lad, nnls, ErrorNorm, FitResult, System};
use crate::design::DesignProblem;
use crate::error::{Error, Result};

/// Largest multiple of the step tried by the path search.
const PATH_STEPS: usize = 10_000;

/// Minimize `sum w |r|^q / J + lambda sum_{i>=1} theta_i` over
/// `theta_i >= 0`, `i >= 1`, with a free intercept.
pub fn fit_lasso(prob: &DesignProblem, lambda: f64, norm: ErrorNorm) -> Result<FitResult> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lasso lambda {lambda}")));
    }
    let n = prob.n_coef();
    let j = prob.n_obs() as f64;
    let sys = System::plain(n, true);
    // the unrooted sums are minimized, so the penalty is scaled by J (and by
    // one half for the squared error, whose solver minimizes |r|^2 / 2)
    let per_coef = match norm {
        ErrorNorm::L2 => 0.5 * j * lambda,
        ErrorNorm::L1 => j * lambda,
    };
    let lin = DVector::from_fn(n, |i, _| if i == 0 { 0.0 } else { per_coef });
    let (z, kkt) = match norm {
        ErrorNorm::L2 => {
            let (a, b) = prob.weights.whiten(&prob.x, &prob.y)?;
            let out = nnls::nnls(&a, &b, Some(&lin), &sys.bounded)?;
            (out.x, out.kkt)
        }
        ErrorNorm::L1 => lad::solve_l1(prob, Some(&lin), &sys)?,
    };
    let theta: Vec<f64> = z.iter().copied().collect();
    let mut fit = assemble(prob, theta, norm, kkt)?;
    fit.penalty = lambda * fit.theta[1..].iter().sum::<f64>();
    Ok(fit)
}

/// Smallest `lambda` on the grid `step, 2 step, ...` whose lasso fit has at
/// most `target` non-zero coefficients besides the intercept.
pub fn lasso_path_to_cardinality(
    prob: &DesignProblem,
    target: usize,
    step: f64,
    norm: ErrorNorm,
) -> Result<(f64, FitResult)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("lasso path step {step}")));
    }
    for k in 1..=PATH_STEPS {
        let lambda = k as f64 * step;
        let fit = fit_lasso(prob, lambda, norm)?;
        if fit.active_support.len() <= target {
            return Ok((lambda, fit));
        }
    }
    Err(Error::IterationLimit("lasso path"))
}
