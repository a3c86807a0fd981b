use mixq::basis::{make_exponential, make_normal, make_student_t, BasisFunction};
use mixq::metrics::gof;
use mixq::model::FittedModel;
use proptest::prelude::*;

fn model(theta: [f64; 4]) -> FittedModel {
    let cat = vec![BasisFunction::constant(), make_normal(), make_exponential(), make_student_t(4.0).unwrap()];
    FittedModel::new(cat, theta.to_vec()).unwrap()
}

#[test]
fn text_round_trip_is_exact() {
    let m = model([0.1 / 3.0, 1.0 / 7.0, 2.0f64.sqrt(), 0.0]);
    let back = FittedModel::from_text(&m.to_text()).unwrap();
    assert_eq!(back.theta(), m.theta());
    assert_eq!(back.catalog(), m.catalog());
    assert_eq!(back.to_text(), m.to_text());
}

#[test]
fn malformed_text_reports_line() {
    let err = FittedModel::from_text("# mixq model v1\nterm x normal\n").unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

#[test]
fn negative_coefficient_is_rejected() {
    let cat = vec![BasisFunction::constant(), make_normal()];
    assert!(FittedModel::new(cat, vec![0.0, -1.0]).is_err());
}

#[test]
fn constant_model_has_no_inverse() {
    let m = FittedModel::new(vec![BasisFunction::constant()], vec![3.0]).unwrap();
    assert!(m.is_degenerate());
    assert!(m.inverse(3.0).is_err());
}

#[test]
fn samples_are_reproducible_and_fit_their_model() {
    let m = model([1.0, 0.7, 0.4, 0.2]);
    let a = m.sample(2000, 11).unwrap();
    assert_eq!(a, m.sample(2000, 11).unwrap());
    assert_ne!(a, m.sample(2000, 12).unwrap());
    let r = gof(&m, &a, None).unwrap();
    // Kolmogorov bound at roughly the 1% level
    assert!(r.ks < 1.63 / (2000f64).sqrt(), "{}", r.ks);
    assert!(r.llk.is_finite());
}

#[test]
fn density_integrates_to_one() {
    let m = model([0.0, 1.0, 0.5, 0.0]);
    let (lo, hi) = (m.evaluate(1e-9).unwrap(), m.evaluate(1.0 - 1e-9).unwrap());
    let n = 20000;
    let h = (hi - lo) / n as f64;
    let total: f64 = (0..n).map(|k| m.density(lo + (k as f64 + 0.5) * h).unwrap() * h).sum();
    assert!((total - 1.0).abs() < 1e-4, "{total}");
    assert_eq!(m.density(lo - 1.0).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_evaluate(
        t0 in -2.0f64..2.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, t3 in 0.0f64..2.0, p in 1e-6f64..0.999999,
    ) {
        prop_assume!(t1 + t2 + t3 > 1e-3);
        let m = model([t0, t1, t2, t3]);
        let x = m.evaluate(p).unwrap();
        let back = m.inverse(x).unwrap();
        prop_assert!((m.evaluate(back).unwrap() - x).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn evaluate_is_monotone(t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let m = model([0.0, t1, t2, 0.5]);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(m.evaluate(lo).unwrap() <= m.evaluate(hi).unwrap() + 1e-12);
    }
}
