//! Scalar special functions: normal and Student-t quantiles, and the inverse
//! of the regularized incomplete beta function.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Halley refinement step against `erfc`.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 - p is exact for p >= 0.5
        return -norm_quantile(1.0 - p);
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = norm_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

pub fn t_pdf(x: f64, nu: f64) -> f64 {
    let ln_c = libm::lgamma(0.5 * (nu + 1.0)) - libm::lgamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (ln_c - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

/// Student-t quantile with `nu` degrees of freedom, through the identity
/// `F(t) = I_{nu/(nu+t^2)}(nu/2, 1/2) / 2` for `t < 0`.
pub fn t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(p));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Parameter(format!("degrees of freedom {nu} must be positive")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let tail = p.min(1.0 - p);
    let (x, one_minus_x) = inv_beta_reg(2.0 * tail, 0.5 * nu, 0.5)?;
    let t = (nu * one_minus_x / x).sqrt();
    Ok(if p < 0.5 { -t } else { t })
}

/// Density of the Beta(a, b) distribution.
pub fn beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
}

/// Inverse of the regularized incomplete beta function `I_x(a, b) = p`.
///
/// Returns `(x, 1 - x)` with both components computed without cancellation.
/// Solved by Newton iteration inside a shrinking bracket, with a bisection
/// fallback whenever the Newton step leaves the bracket.
pub fn inv_beta_reg(p: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Parameter(format!("beta shape ({a}, {b}) must be positive")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    if p == 0.0 {
        return Ok((0.0, 1.0));
    }
    if p == 1.0 {
        return Ok((1.0, 0.0));
    }
    if p > 0.5 {
        let (y, one_minus_y) = lower_inv_beta(1.0 - p, b, a)?;
        return Ok((one_minus_y, y));
    }
    lower_inv_beta(p, a, b)
}

fn lower_inv_beta(p: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let ln_b = ln_beta(a, b);
    let mean = a / (a + b);
    // I_x(a,b) ~ x^a / (a B(a,b)) near zero
    let tail_guess = ((p.ln() + a.ln() + ln_b) / a).exp();
    let mut x = if tail_guess.is_finite() && tail_guess < mean { tail_guess } else { mean };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..400 {
        let f = beta_reg(a, b, x) - p;
        if f == 0.0 {
            return Ok((x, 1.0 - x));
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp();
        let mut next = x - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo == 0.0 {
                0.1 * hi
            } else if hi / lo > 16.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok((next, 1.0 - next));
        }
        x = next;
    }
    Err(Error::Convergence("inverse incomplete beta"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_matches_cdf() {
        for &p in &[1e-12, 1e-6, 0.001, 0.02, 0.3, 0.5, 0.7, 0.975, 0.999999] {
            let x = norm_quantile(p);
            let back = if p < 0.5 { norm_cdf(x) } else { 1.0 - norm_cdf(-x) };
            assert!(((back - p) / p.min(1.0 - p)).abs() < 1e-12, "p={p} back={back}");
        }
        assert_eq!(norm_quantile(0.5), 0.0);
        let z = norm_quantile(0.975);
        assert!((z - 1.959963984540054).abs() < 1e-13, "{z}");
    }

    #[test]
    fn beta_inverse_roundtrip() {
        for &(a, b) in &[(1.0, 1.0), (0.5, 0.5), (2.5, 7.0), (10.0, 1.0), (1.0, 10.0), (10.0, 10.0)] {
            for &p in &[1e-12, 1e-4, 0.1, 0.5, 0.9, 1.0 - 1e-9] {
                let (x, cx) = inv_beta_reg(p, a, b).unwrap();
                assert!((x + cx - 1.0).abs() < 1e-15);
                let err = if p < 0.5 {
                    (beta_reg(a, b, x) - p).abs() / p
                } else {
                    (beta_reg(b, a, cx) - (1.0 - p)).abs() / (1.0 - p)
                };
                let back = (x, cx);
                assert!(err < 1e-9, "a={a} b={b} p={p} x={x} back={back:?}");
            }
        }
        // Beta(1,1) is uniform
        assert!((inv_beta_reg(0.37, 1.0, 1.0).unwrap().0 - 0.37).abs() < 1e-14);
    }

    #[test]
    fn t_quantile_known_values() {
        // two-sided 95% critical values
        assert!((t_quantile(0.975, 5.0).unwrap() - 2.570581835636314).abs() < 1e-11);
        assert!((t_quantile(0.975, 1.0).unwrap() - 12.706204736174698).abs() < 1e-9);
        assert!((t_quantile(0.25, 2.0).unwrap() + 0.816496580927726).abs() < 1e-12);
        assert!(t_quantile(0.0, 3.0).is_err());
        assert!(t_quantile(0.3, -1.0).is_err());
    }

    #[test]
    fn t_pdf_integrates_like_cdf_difference() {
        // pdf at 0 for nu = 1 is 1/pi
        assert!((t_pdf(0.0, 1.0) - 1.0 / PI).abs() < 1e-14);
    }
}
