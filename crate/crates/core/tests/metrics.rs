use mixq::basis::{make_exponential, make_normal, BasisFunction};
use mixq::metrics::{gof, model_distance, model_lmoments, sample_lmoments, wasserstein};
use mixq::model::FittedModel;
use proptest::prelude::*;

fn model(t0: f64, t1: f64, t2: f64) -> FittedModel {
    FittedModel::new(vec![BasisFunction::constant(), make_normal(), make_exponential()], vec![t0, t1, t2]).unwrap()
}

#[test]
fn distance_to_self_is_zero() {
    let m = model(0.3, 1.0, 0.5);
    assert!(model_distance(&m, &m, 2.0).unwrap() < 1e-14);
}

#[test]
fn scaled_identity_distance() {
    // W_q between p and a p is |1 - a| (q + 1)^(-1/q)
    for q in [1.0, 2.0, 3.0] {
        let d = wasserstein(|p| Ok(p), |p| Ok(3.0 * p), |_| 1.0, q).unwrap();
        let want = 2.0 * (q + 1.0f64).powf(-1.0 / q);
        assert!((d - want).abs() < 1e-9, "{q} {d} {want}");
    }
}

#[test]
fn sample_lmoments_approach_model_lmoments() {
    let m = model(1.0, 0.8, 0.6);
    let s = m.sample(40_000, 5).unwrap();
    let a = sample_lmoments(&s, 3).unwrap();
    let b = model_lmoments(&m, 3).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 0.03, "{a:?} {b:?}");
    }
}

#[test]
fn sample_lmoments_of_small_sample() {
    // b0 = 2, b1 = (0*1 + 1*2 + 2*3) / (3*2) = 4/3; l2 = 2 b1 - b0
    let l = sample_lmoments(&[3.0, 1.0, 2.0], 2).unwrap();
    assert!((l[0] - 2.0).abs() < 1e-15);
    assert!((l[1] - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn gof_report_csv_has_header() {
    let m = model(0.0, 1.0, 0.0);
    let s = m.sample(200, 1).unwrap();
    let csv = gof(&m, &s, None).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "statistic,value");
    assert_eq!(lines.len(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn distance_is_symmetric(a in -1.0f64..1.0, b in 0.0f64..2.0, c in 0.0f64..2.0, d in 0.0f64..2.0) {
        let (m1, m2) = (model(a, b, c), model(-a, d, b));
        let x = model_distance(&m1, &m2, 2.0).unwrap();
        let y = model_distance(&m2, &m1, 2.0).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
    }

    #[test]
    fn location_shift_distance(c in -5.0f64..5.0, q in 1.0f64..3.0) {
        let m1 = model(0.0, 1.0, 0.5);
        let m2 = model(c, 1.0, 0.5);
        prop_assert!((model_distance(&m1, &m2, q).unwrap() - c.abs()).abs() < 1e-6);
    }
}
