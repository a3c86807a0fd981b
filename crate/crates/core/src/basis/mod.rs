//! Basis quantile functions.
//!
//! Every member is a non-decreasing function on (0, 1). Apart from the
//! constant, members are standardized as `(Q_raw(p) - shift) / scale`:
//!
//! * two-tailed families: zero median and unit interquartile range;
//! * one-tailed families: zero left endpoint (evaluated at [`ZERO_LEVEL`]) and
//!   unit interquartile range.

mod catalog;
mod ispline;

use std::fmt;

pub use catalog::{dump_catalog, make_catalog, CatalogSpec, FamilySpec, FilterSpec, Lattice};
pub use ispline::{make_ispline_basis, uniform_knots, ISpline};

use crate::error::{Error, Result};
use crate::special::{beta_pdf, inv_beta_reg, norm_pdf, norm_quantile, t_pdf, t_quantile};

/// Level at which the left endpoint of one-tailed families is evaluated.
pub const ZERO_LEVEL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailType {
    /// The constant basis; never standardized.
    None,
    TwoTailed,
    OneTailed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisKind {
    Constant,
    /// Identity quantile `Q(p) = p`.
    Uniform,
    Normal,
    /// `Q(p) = -ln(1 - p)`.
    Exponential,
    StudentT { nu: f64 },
    /// Student-t quantile with the lower half divided by `gamma` and the upper
    /// half multiplied by it.
    SkewedT { gamma: f64, nu: f64 },
    /// Generalized beta of the second kind; `a` shape, `b` scale, `p` and `q`
    /// the beta shapes.
    Gb2 { a: f64, b: f64, p: f64, q: f64 },
    ISpline(ISpline),
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Constant => "constant",
            BasisKind::Uniform => "uniform",
            BasisKind::Normal => "normal",
            BasisKind::Exponential => "exponential",
            BasisKind::StudentT { .. } => "student-t",
            BasisKind::SkewedT { .. } => "skewed-t",
            BasisKind::Gb2 { .. } => "gb2",
            BasisKind::ISpline(_) => "ispline",
        }
    }

    pub fn tail_type(&self) -> TailType {
        match self {
            BasisKind::Constant => TailType::None,
            BasisKind::Normal | BasisKind::StudentT { .. } | BasisKind::SkewedT { .. } => {
                TailType::TwoTailed
            }
            BasisKind::Uniform
            | BasisKind::Exponential
            | BasisKind::Gb2 { .. }
            | BasisKind::ISpline(_) => TailType::OneTailed,
        }
    }

    /// Shape parameters as `(name, value)` pairs, in serialization order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            BasisKind::Constant | BasisKind::Uniform | BasisKind::Normal | BasisKind::Exponential => {
                vec![]
            }
            BasisKind::StudentT { nu } => vec![("nu", fmt_f64(*nu))],
            BasisKind::SkewedT { gamma, nu } => {
                vec![("gamma", fmt_f64(*gamma)), ("nu", fmt_f64(*nu))]
            }
            BasisKind::Gb2 { a, b, p, q } => vec![
                ("a", fmt_f64(*a)),
                ("b", fmt_f64(*b)),
                ("p", fmt_f64(*p)),
                ("q", fmt_f64(*q)),
            ],
            BasisKind::ISpline(s) => vec![
                ("degree", s.degree().to_string()),
                ("knots", s.knots().iter().map(|k| fmt_f64(*k)).collect::<Vec<_>>().join(";")),
                ("index", s.index().to_string()),
            ],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        match *self {
            BasisKind::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => {
                bad(format!("student-t nu = {nu}"))
            }
            BasisKind::SkewedT { gamma, nu }
                if !(gamma > 0.0 && gamma.is_finite() && nu > 0.0 && nu.is_finite()) =>
            {
                bad(format!("skewed-t gamma = {gamma}, nu = {nu}"))
            }
            BasisKind::Gb2 { a, b, p, q }
                if a == 0.0 || !a.is_finite() || !(b > 0.0 && p > 0.0 && q > 0.0) =>
            {
                bad(format!("gb2 parameters ({a}, {b}, {p}, {q})"))
            }
            _ => Ok(()),
        }
    }

    /// Unstandardized quantile.
    pub fn raw_quantile(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        Ok(match self {
            BasisKind::Constant => 1.0,
            BasisKind::Uniform => p,
            BasisKind::Normal => norm_quantile(p),
            BasisKind::Exponential => -(-p).ln_1p(),
            BasisKind::StudentT { nu } => t_quantile(p, *nu)?,
            BasisKind::SkewedT { gamma, nu } => {
                let q = t_quantile(p, *nu)?;
                if p <= 0.5 {
                    q / gamma
                } else {
                    q * gamma
                }
            }
            BasisKind::Gb2 { a, b, p: shape_p, q: shape_q } => {
                let level = if *a > 0.0 { p } else { 1.0 - p };
                let (x, one_minus_x) = inv_beta_reg(level, *shape_p, *shape_q)?;
                b * (x / one_minus_x).powf(1.0 / a)
            }
            BasisKind::ISpline(s) => s.value(p),
        })
    }

    /// Derivative of the unstandardized quantile with respect to `p`.
    pub fn raw_derivative(&self, p: f64) -> Result<f64> {
        check_level(p)?;
        Ok(match self {
            BasisKind::Constant => 0.0,
            BasisKind::Uniform => 1.0,
            BasisKind::Normal => 1.0 / norm_pdf(norm_quantile(p)),
            BasisKind::Exponential => 1.0 / (1.0 - p),
            BasisKind::StudentT { nu } => 1.0 / t_pdf(t_quantile(p, *nu)?, *nu),
            BasisKind::SkewedT { gamma, nu } => {
                let factor = if p <= 0.5 { 1.0 / gamma } else { *gamma };
                factor / t_pdf(t_quantile(p, *nu)?, *nu)
            }
            BasisKind::Gb2 { a, b, p: shape_p, q: shape_q } => {
                let level = if *a > 0.0 { p } else { 1.0 - p };
                let (x, one_minus_x) = inv_beta_reg(level, *shape_p, *shape_q)?;
                // Q = b r^(1/a), r = x / (1 - x), dx/dp = +-1 / beta_pdf(x)
                let r = x / one_minus_x;
                let dq_dr = b / a * r.powf(1.0 / a - 1.0);
                let dr_dx = 1.0 / (one_minus_x * one_minus_x);
                let dx_dp = 1.0 / beta_pdf(x, *shape_p, *shape_q);
                (dq_dr * dr_dx * dx_dp).abs()
            }
            BasisKind::ISpline(s) => s.derivative(p),
        })
    }
}

/// A standardized basis quantile function. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisFunction {
    kind: BasisKind,
    shift: f64,
    scale: f64,
}

impl BasisFunction {
    /// Build a member with the standardization implied by its tail type.
    pub fn standardized(kind: BasisKind) -> Result<Self> {
        kind.validate()?;
        let (shift, scale) = match kind.tail_type() {
            TailType::None => (0.0, 1.0),
            TailType::TwoTailed => {
                (kind.raw_quantile(0.5)?, kind.raw_quantile(0.75)? - kind.raw_quantile(0.25)?)
            }
            TailType::OneTailed => (
                kind.raw_quantile(ZERO_LEVEL)?,
                kind.raw_quantile(0.75)? - kind.raw_quantile(0.25)?,
            ),
        };
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::Parameter(format!(
                "{} cannot be standardized (interquartile range {scale})",
                kind.name()
            )));
        }
        Ok(BasisFunction { kind, shift, scale })
    }

    /// A member evaluated without standardization.
    pub fn raw(kind: BasisKind) -> Result<Self> {
        Self::with_affine(kind, 0.0, 1.0)
    }

    /// A member with an explicit affine map, e.g. when loading a saved model.
    pub fn with_affine(kind: BasisKind, shift: f64, scale: f64) -> Result<Self> {
        kind.validate()?;
        if !(scale > 0.0 && scale.is_finite() && shift.is_finite()) {
            return Err(Error::Parameter(format!("affine map shift={shift} scale={scale}")));
        }
        Ok(BasisFunction { kind, shift, scale })
    }

    pub fn constant() -> Self {
        BasisFunction { kind: BasisKind::Constant, shift: 0.0, scale: 1.0 }
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn tail_type(&self) -> TailType {
        self.kind.tail_type()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, BasisKind::Constant)
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        if self.is_constant() {
            check_level(p)?;
            return Ok(1.0);
        }
        Ok((self.kind.raw_quantile(p)? - self.shift) / self.scale)
    }

    /// `dQ/dp` of the standardized function.
    pub fn derivative(&self, p: f64) -> Result<f64> {
        Ok(self.kind.raw_derivative(p)? / self.scale)
    }

    /// Single-line textual form: `kind key=value ... shift=.. scale=..`.
    pub fn to_tokens(&self) -> String {
        let mut s = self.kind.name().to_string();
        for (k, v) in self.kind.params() {
            s.push(' ');
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
        }
        s.push_str(&format!(" shift={} scale={}", fmt_f64(self.shift), fmt_f64(self.scale)));
        s
    }

    /// Inverse of [`BasisFunction::to_tokens`].
    pub fn from_tokens(text: &str) -> Result<Self> {
        let mut it = text.split_whitespace();
        let name = it.next().ok_or_else(|| Error::InvalidInput("empty basis line".into()))?;
        let mut fields = std::collections::BTreeMap::new();
        for tok in it {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got '{tok}'")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let num = |k: &str| -> Result<f64> {
            let v = fields
                .get(k)
                .ok_or_else(|| Error::InvalidInput(format!("{name}: missing '{k}'")))?;
            v.parse::<f64>().map_err(|_| Error::InvalidInput(format!("{name}: bad number '{v}'")))
        };
        let kind = match name {
            "constant" => BasisKind::Constant,
            "uniform" => BasisKind::Uniform,
            "normal" => BasisKind::Normal,
            "exponential" => BasisKind::Exponential,
            "student-t" => BasisKind::StudentT { nu: num("nu")? },
            "skewed-t" => BasisKind::SkewedT { gamma: num("gamma")?, nu: num("nu")? },
            "gb2" => BasisKind::Gb2 { a: num("a")?, b: num("b")?, p: num("p")?, q: num("q")? },
            "ispline" => {
                let degree = num("degree")? as usize;
                let index = num("index")? as usize;
                let knots = fields
                    .get("knots")
                    .ok_or_else(|| Error::InvalidInput("ispline: missing 'knots'".into()))?
                    .split(';')
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("ispline: bad knot '{v}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                BasisKind::ISpline(ISpline::new(degree, &knots, index)?)
            }
            other => return Err(Error::InvalidInput(format!("unknown basis kind '{other}'"))),
        };
        if matches!(kind, BasisKind::Constant) {
            return Ok(BasisFunction::constant());
        }
        BasisFunction::with_affine(kind, num("shift")?, num("scale")?)
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.kind.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        if params.is_empty() {
            write!(f, "{}", self.kind.name())
        } else {
            write!(f, "{}({})", self.kind.name(), params.join(","))
        }
    }
}

pub fn make_normal() -> BasisFunction {
    BasisFunction::standardized(BasisKind::Normal).expect("normal standardizes")
}

pub fn make_exponential() -> BasisFunction {
    BasisFunction::standardized(BasisKind::Exponential).expect("exponential standardizes")
}

pub fn make_student_t(nu: f64) -> Result<BasisFunction> {
    BasisFunction::standardized(BasisKind::StudentT { nu })
}

/// Skewed Student-t member. The normalizer is applied after the `gamma`
/// factors, so the interquartile range is exactly one for every `gamma`.
pub fn make_skewed_t(gamma: f64, nu: f64) -> Result<BasisFunction> {
    BasisFunction::standardized(BasisKind::SkewedT { gamma, nu })
}

/// GB2 member with shape `theta1`, scale `theta2` and beta shapes
/// `theta3`, `theta4`, standardized as a one-tailed family.
pub fn make_gb2(theta1: f64, theta2: f64, theta3: f64, theta4: f64) -> Result<BasisFunction> {
    BasisFunction::standardized(BasisKind::Gb2 { a: theta1, b: theta2, p: theta3, q: theta4 })
}

pub(crate) fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(p))
    }
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
    }

    #[test]
    fn standardized_normal_values() {
        let b = make_normal();
        assert!(b.eval(0.5).unwrap().abs() < 1e-15);
        assert!((b.eval(0.75).unwrap() - 0.5).abs() < 1e-12);
        assert!((b.eval(0.25).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn standardized_exponential_median() {
        // oracle: the raw IQR is ln(4/3) - ... = ln 3; median ln 2
        let b = make_exponential();
        let expected = (2f64.ln() - ZERO_LEVEL) / 3f64.ln();
        assert!((b.eval(0.5).unwrap() - expected).abs() < 1e-12);
        assert!((b.eval(0.5).unwrap() - 0.630930).abs() < 1e-6);
        // numerical standardization agrees with the analytic IQR
        assert!((b.scale() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn skewed_t_with_unit_gamma_is_standardized_t() {
        let st = make_skewed_t(1.0, 5.0).unwrap();
        let t = make_student_t(5.0).unwrap();
        for p in grid(99) {
            assert!((st.eval(p).unwrap() - t.eval(p).unwrap()).abs() < 1e-14);
        }
        assert_eq!(st.eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn skewed_t_quartile_ratio_is_gamma_squared() {
        let st = make_skewed_t(2.0, 5.0).unwrap();
        let ratio = st.eval(0.75).unwrap() / st.eval(0.25).unwrap().abs();
        assert!((ratio - 4.0).abs() < 1e-12);
        // independent t quantile oracle from statrs
        let t = StudentsT::new(0.0, 1.0, 5.0).unwrap();
        let q75 = t.inverse_cdf(0.75);
        let r = q75 * (2.0 + 0.5);
        assert!((st.eval(0.9).unwrap() - 2.0 * t.inverse_cdf(0.9) / r).abs() < 1e-8);
        for &(g, nu) in &[(0.5, 5.0), (1.7, 11.0), (3.0, 2.5)] {
            let b = make_skewed_t(g, nu).unwrap();
            assert!((b.eval(0.75).unwrap() - b.eval(0.25).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gb2_lomax_special_case() {
        // Beta(1,1) inverse is the identity, so Q_raw(p) = p / (1 - p)
        let kind = BasisKind::Gb2 { a: 1.0, b: 1.0, p: 1.0, q: 1.0 };
        assert!((kind.raw_quantile(0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((kind.raw_quantile(0.2).unwrap() - 0.25).abs() < 1e-14);
        let scaled = BasisKind::Gb2 { a: 1.0, b: 2.0, p: 1.0, q: 1.0 };
        assert!((scaled.raw_quantile(0.5).unwrap() - 2.0).abs() < 1e-14);
        let s1 = make_gb2(1.0, 1.0, 1.0, 1.0).unwrap();
        let s2 = make_gb2(1.0, 2.0, 1.0, 1.0).unwrap();
        for p in grid(19) {
            assert!((s1.eval(p).unwrap() - s2.eval(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gb2_cdf_roundtrip() {
        // CDF of GB2: F(x) = I_{z/(1+z)}(p, q), z = (x/b)^a
        for &(a, b, p, q) in &[(1.0, 0.3, 2.0, 5.0), (2.5, 1.0, 0.7, 3.0), (-1.5, 0.8, 2.0, 2.0)] {
            let kind = BasisKind::Gb2 { a, b, p, q };
            for k in 1..=9 {
                let level = k as f64 / 10.0;
                let x = kind.raw_quantile(level).unwrap();
                let z: f64 = (x / b).powf(a);
                let u = z / (1.0 + z);
                let cdf = statrs::function::beta::beta_reg(p, q, u);
                let cdf = if a > 0.0 { cdf } else { 1.0 - cdf };
                assert!((cdf - level).abs() < 1e-8, "a={a} level={level} cdf={cdf}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let members = vec![
            make_normal(),
            make_exponential(),
            make_student_t(3.0).unwrap(),
            make_skewed_t(1.6, 7.0).unwrap(),
            make_gb2(1.0, 0.4, 3.0, 2.0).unwrap(),
            make_gb2(-2.0, 1.0, 3.0, 2.0).unwrap(),
        ];
        for b in &members {
            for &p in &[0.05, 0.3, 0.62, 0.9] {
                let h = 1e-6;
                let fd = (b.eval(p + h).unwrap() - b.eval(p - h).unwrap()) / (2.0 * h);
                let an = b.derivative(p).unwrap();
                assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{b} p={p} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn errors_for_bad_inputs() {
        assert!(matches!(make_normal().eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(make_normal().eval(1.0), Err(Error::Domain(_))));
        assert!(matches!(make_skewed_t(0.0, 5.0), Err(Error::Parameter(_))));
        assert!(matches!(make_skewed_t(1.0, -5.0), Err(Error::Parameter(_))));
        assert!(matches!(make_gb2(0.0, 1.0, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(make_gb2(1.0, -1.0, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(make_student_t(0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn tokens_roundtrip_bit_exact() {
        let b = make_skewed_t(1.0 / 1.8, 7.0).unwrap();
        let back = BasisFunction::from_tokens(&b.to_tokens()).unwrap();
        assert_eq!(b, back);
        let c = BasisFunction::constant();
        assert_eq!(BasisFunction::from_tokens(&c.to_tokens()).unwrap(), c);
    }
}
