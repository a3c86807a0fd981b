use std::sync::Arc;

use super::{BasisFunction, BasisKind};
use crate::error::{Error, Result};

// 3-point Gauss–Legendre on [-1, 1]; exact for the piecewise polynomials of
// degree <= 5 integrated below.
const GL_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL_W: [f64; 3] = [0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6];

/// One member of an I-spline basis: the running integral of an M-spline.
///
/// `degree` is the polynomial degree of the I-spline, so the underlying
/// M-spline has order `degree` (polynomial degree `degree - 1`). The boundary
/// knots are the first and last entries of `knots`.
#[derive(Clone, Debug, PartialEq)]
pub struct ISpline {
    degree: usize,
    knots: Arc<[f64]>,
    index: usize,
    /// Extended knot vector with `degree`-fold boundary knots.
    ext: Arc<[f64]>,
    /// Integral of the M-spline up to each breakpoint.
    cum: Arc<[f64]>,
}

impl ISpline {
    pub fn new(degree: usize, knots: &[f64], index: usize) -> Result<Self> {
        if !(1..=4).contains(&degree) {
            return Err(Error::Parameter(format!("ispline degree {degree} not in 1..=4")));
        }
        if knots.len() < 2
            || knots.windows(2).any(|w| !(w[0] < w[1]))
            || knots[0] < 0.0
            || knots[knots.len() - 1] > 1.0
        {
            return Err(Error::KnotOrder);
        }
        let count = basis_count(degree, knots.len());
        if index >= count {
            return Err(Error::Parameter(format!("ispline index {index} >= {count}")));
        }
        let k = degree;
        let mut ext = Vec::with_capacity(knots.len() + 2 * (k - 1));
        ext.extend(std::iter::repeat(knots[0]).take(k - 1));
        ext.extend_from_slice(knots);
        ext.extend(std::iter::repeat(knots[knots.len() - 1]).take(k - 1));
        let mut spline = ISpline {
            degree,
            knots: knots.into(),
            index,
            ext: ext.into(),
            cum: Arc::from(Vec::new()),
        };
        let mut cum = vec![0.0; knots.len()];
        for j in 1..knots.len() {
            cum[j] = cum[j - 1] + spline.integrate_piece(knots[j - 1], knots[j]);
        }
        spline.cum = cum.into();
        Ok(spline)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// M-spline value, normalized to unit integral.
    pub fn derivative(&self, x: f64) -> f64 {
        let k = self.degree;
        let (lo, hi) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if x < lo || x > hi {
            return 0.0;
        }
        let i = self.index;
        let width = self.ext[i + k] - self.ext[i];
        if width <= 0.0 {
            return 0.0;
        }
        k as f64 * bspline(&self.ext, k, i, x) / width
    }

    /// I-spline value: integral of the M-spline from the left boundary to `x`.
    pub fn value(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return 0.0;
        }
        if x >= self.knots[n - 1] {
            return self.cum[n - 1];
        }
        let j = self.knots.partition_point(|&b| b <= x) - 1;
        self.cum[j] + self.integrate_piece(self.knots[j], x)
    }

    fn integrate_piece(&self, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        GL_X.iter().zip(GL_W.iter()).map(|(x, w)| w * self.derivative(c + h * x)).sum::<f64>() * h
    }
}

/// Number of I-spline functions for `degree` over `n_knots` breakpoints.
pub fn basis_count(degree: usize, n_knots: usize) -> usize {
    n_knots - 2 + degree
}

/// `interior + 2` evenly spaced breakpoints over [0, 1].
pub fn uniform_knots(interior: usize) -> Vec<f64> {
    let n = interior + 1;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Standardized I-spline basis over `knots`. Members that are flat on the
/// interquartile range cannot be standardized and are left out.
pub fn make_ispline_basis(degree: usize, knots: &[f64]) -> Result<Vec<BasisFunction>> {
    if knots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::KnotOrder);
    }
    let count = basis_count(degree, knots.len().max(2));
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let spline = ISpline::new(degree, knots, index)?;
        match BasisFunction::standardized(BasisKind::ISpline(spline)) {
            Ok(b) => out.push(b),
            Err(Error::Parameter(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Cox–de Boor evaluation of the `i`-th B-spline of order `k` on `t`.
/// Right-continuous, except that the last non-degenerate span is closed at
/// the right boundary.
fn bspline(t: &[f64], k: usize, i: usize, x: f64) -> f64 {
    let last = t[t.len() - 1];
    let mut n: Vec<f64> = (0..k)
        .map(|j| {
            let (a, b) = (t[i + j], t[i + j + 1]);
            let inside = (a <= x && x < b) || (x == last && b == last && a < b);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for order in 2..=k {
        for j in 0..=(k - order) {
            let idx = i + j;
            let mut v = 0.0;
            let d1 = t[idx + order - 1] - t[idx];
            if d1 > 0.0 {
                v += (x - t[idx]) / d1 * n[j];
            }
            let d2 = t[idx + order] - t[idx + 1];
            if d2 > 0.0 {
                v += (t[idx + order] - x) / d2 * n[j + 1];
            }
            n[j] = v;
        }
    }
    n[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn raw_ispline_reaches_one() {
        // oracle: adaptive quadrature of the M-spline, independent of the
        // Gauss–Legendre accumulation used by `value`
        for &(deg, ref knots) in &[(2usize, vec![0.0, 0.5, 1.0]), (3, vec![0.0, 0.2, 0.45, 0.7, 1.0])] {
            for index in 0..basis_count(deg, knots.len()) {
                let s = ISpline::new(deg, knots, index).unwrap();
                let (mass, _) = integrate(|x| Ok(s.derivative(x)), 0.0, 1.0, 1e-14, 1e-13).unwrap();
                assert!((mass - 1.0).abs() < 1e-10, "deg={deg} idx={index} mass={mass}");
                assert!((s.value(1.0) - 1.0).abs() < 1e-12);
                assert_eq!(s.value(0.0), 0.0);
            }
        }
    }

    #[test]
    fn basis_is_monotone_and_sum_is_monotone() {
        let basis = make_ispline_basis(2, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(basis.len(), 3);
        let grid: Vec<f64> = (1..=1001).map(|k| k as f64 / 1002.0).collect();
        let mut prev_sum = f64::NEG_INFINITY;
        let mut prev: Vec<f64> = vec![f64::NEG_INFINITY; basis.len()];
        for &p in &grid {
            let vals: Vec<f64> = basis.iter().map(|b| b.eval(p).unwrap()).collect();
            for (v, pv) in vals.iter().zip(prev.iter()) {
                assert!(*v >= *pv - 1e-15);
            }
            let s: f64 = vals.iter().sum();
            assert!(s >= prev_sum - 1e-14);
            prev_sum = s;
            prev = vals;
        }
    }

    #[test]
    fn standardization_identities() {
        for b in make_ispline_basis(3, &uniform_knots(2)).unwrap() {
            assert!(b.eval(1e-12).unwrap().abs() < 1e-9);
            assert!((b.eval(0.75).unwrap() - b.eval(0.25).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn knot_order_is_checked() {
        assert!(matches!(make_ispline_basis(2, &[0.0, 0.6, 0.5, 1.0]), Err(Error::KnotOrder)));
        assert!(matches!(ISpline::new(2, &[0.0, 0.0, 1.0], 0), Err(Error::KnotOrder)));
    }
}
