//! Fitted mixture quantile functions `G(p) = sum theta_i Q_i(p)`.

use std::fmt::Write as _;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{fmt_f64, BasisFunction, ZERO_LEVEL};
use crate::error::{Error, Result};
use crate::solve::FitResult;

/// Levels at which `inverse` clamps.
pub const LOW_LEVEL: f64 = ZERO_LEVEL;
pub const HIGH_LEVEL: f64 = 1.0 - ZERO_LEVEL;

const HEADER: &str = "# mixq model v1";

#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    catalog: Vec<BasisFunction>,
    theta: Vec<f64>,
}

impl FittedModel {
    pub fn new(catalog: Vec<BasisFunction>, theta: Vec<f64>) -> Result<Self> {
        if catalog.is_empty() || catalog.len() != theta.len() {
            return Err(Error::InvalidInput(format!(
                "{} basis functions but {} coefficients",
                catalog.len(),
                theta.len()
            )));
        }
        if let Some(t) = theta.iter().find(|t| !t.is_finite()) {
            return Err(Error::Parameter(format!("non-finite coefficient {t}")));
        }
        for (b, &t) in catalog.iter().zip(&theta) {
            if !b.is_constant() && t < 0.0 {
                return Err(Error::Parameter(format!("negative coefficient {t} on {b}")));
            }
        }
        Ok(FittedModel { catalog, theta })
    }

    /// Drops terms with a zero coefficient (except a leading constant).
    pub fn from_fit(catalog: &[BasisFunction], fit: &FitResult) -> Result<Self> {
        let mut cat = Vec::new();
        let mut theta = Vec::new();
        for (i, (b, &t)) in catalog.iter().zip(&fit.theta).enumerate() {
            if t != 0.0 || i == 0 {
                cat.push(b.clone());
                // clip the tiny negative values an active-set solve can leave
                theta.push(if b.is_constant() { t } else { t.max(0.0) });
            }
        }
        FittedModel::new(cat, theta)
    }

    pub fn catalog(&self) -> &[BasisFunction] {
        &self.catalog
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn evaluate(&self, p: f64) -> Result<f64> {
        let mut g = 0.0;
        for (b, &t) in self.catalog.iter().zip(&self.theta) {
            if t != 0.0 {
                g += t * b.eval(p)?;
            } else {
                crate::basis::check_level(p)?;
            }
        }
        Ok(g)
    }

    /// `dG/dp` from the analytic basis derivatives.
    pub fn derivative(&self, p: f64) -> Result<f64> {
        let mut d = 0.0;
        for (b, &t) in self.catalog.iter().zip(&self.theta) {
            if t != 0.0 && !b.is_constant() {
                d += t * b.derivative(p)?;
            }
        }
        Ok(d)
    }

    /// True when every non-constant coefficient is zero.
    pub fn is_degenerate(&self) -> bool {
        self.catalog.iter().zip(&self.theta).all(|(b, &t)| b.is_constant() || t == 0.0)
    }

    /// `inf { p : G(p) >= x }`, clamped to `[LOW_LEVEL, HIGH_LEVEL]`.
    pub fn inverse(&self, x: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::Degenerate("constant model has no inverse".into()));
        }
        if x.is_nan() {
            return Err(Error::InvalidInput("inverse of NaN".into()));
        }
        let (mut a, mut b) = (LOW_LEVEL, HIGH_LEVEL);
        let (ga, gb) = (self.evaluate(a)?, self.evaluate(b)?);
        if x <= ga {
            return Ok(a);
        }
        if x >= gb {
            return Ok(b);
        }
        let spread = self.evaluate(0.75)? - self.evaluate(0.25)?;
        let tol = 1e-13 * spread.max(x.abs()).max(f64::MIN_POSITIVE);
        let mut p = 0.5;
        for _ in 0..400 {
            let g = self.evaluate(p)? - x;
            if g >= 0.0 {
                b = p;
            } else {
                a = p;
            }
            if g.abs() <= tol || b - a <= 1e-14 * b.max(1e-300) {
                // polish once with Newton inside the bracket
                let d = self.derivative(p)?;
                if d > 0.0 && d.is_finite() {
                    let q = p - g / d;
                    if q > a && q < b {
                        p = q;
                    }
                }
                return Ok(p);
            }
            let d = self.derivative(p)?;
            let newton = if d > 0.0 && d.is_finite() { p - g / d } else { f64::NAN };
            p = if newton > a && newton < b && (newton - p).abs() < 0.5 * (b - a) {
                newton
            } else {
                // bisect in logit space, which also splits brackets that span
                // several orders of magnitude near either end
                let mid = 0.5 * (logit(a) + logit(b));
                (1.0 / (1.0 + (-mid).exp())).clamp(a, b)
            };
        }
        Err(Error::Convergence("quantile inversion"))
    }

    /// `1 / G'(G^-1(x))`; zero outside `[G(LOW_LEVEL), G(HIGH_LEVEL)]`.
    pub fn density(&self, x: f64) -> Result<f64> {
        let p = self.inverse(x)?;
        if (p == LOW_LEVEL && x < self.evaluate(LOW_LEVEL)?) || (p == HIGH_LEVEL && x > self.evaluate(HIGH_LEVEL)?)
        {
            return Ok(0.0);
        }
        let d = self.derivative(p)?;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Degenerate(format!("unbounded density at x = {x}")));
        }
        Ok(1.0 / d)
    }

    /// Inverse transform sampling with a seeded ChaCha8 stream.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.evaluate(u)
            })
            .collect()
    }

    /// One `term <theta> <basis tokens>` line per basis function.
    pub fn to_text(&self) -> String {
        let mut s = String::from(HEADER);
        s.push('\n');
        for (b, &t) in self.catalog.iter().zip(&self.theta) {
            let _ = writeln!(s, "term {} {}", fmt_f64(t), b.to_tokens());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut catalog = Vec::new();
        let mut theta = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
            let rest = line
                .strip_prefix("term ")
                .ok_or_else(|| parse_err(format!("expected 'term', got '{line}'")))?;
            let (t, tokens) = rest
                .trim_start()
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err("missing basis description".into()))?;
            let t: f64 = t.parse().map_err(|_| parse_err(format!("bad coefficient '{t}'")))?;
            let b = BasisFunction::from_tokens(tokens).map_err(|e| parse_err(e.to_string()))?;
            theta.push(t);
            catalog.push(b);
        }
        FittedModel::new(catalog, theta)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_exponential, make_normal, BasisKind};

    fn mix() -> FittedModel {
        FittedModel::new(
            vec![BasisFunction::constant(), make_normal(), make_exponential()],
            vec![0.3, 1.2, 0.7],
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_inverse() {
        let m = mix();
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let x = m.evaluate(p).unwrap();
            assert!((m.inverse(x).unwrap() - p).abs() < 1e-9, "p={p}");
        }
        assert_eq!(m.inverse(-1e9).unwrap(), LOW_LEVEL);
    }

    #[test]
    fn normal_density_at_center() {
        let b = BasisFunction::raw(BasisKind::Normal).unwrap();
        let m = FittedModel::new(vec![BasisFunction::constant(), b], vec![0.0, 1.0]).unwrap();
        let oracle = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((m.density(0.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let m = FittedModel::new(
            vec![BasisFunction::constant(), crate::basis::make_gb2(2.5, 1.0, 0.7, 1.9).unwrap()],
            vec![-0.1 / 3.0, std::f64::consts::PI],
        )
        .unwrap();
        let back = FittedModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn constant_model() {
        let m = FittedModel::new(vec![BasisFunction::constant()], vec![2.5]).unwrap();
        assert!(m.sample(5, 1).unwrap().iter().all(|&v| v == 2.5));
        assert!(matches!(m.inverse(1.0), Err(Error::Degenerate(_))));
    }
}
