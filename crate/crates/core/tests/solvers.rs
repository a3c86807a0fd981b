use mixq::basis::{make_exponential, make_normal, make_skewed_t, make_student_t, BasisFunction};
use mixq::design::{build_problem, PlottingScheme, WeightSpec};
use mixq::model::FittedModel;
use mixq::par::Exec;
use mixq::solve::{
    cvar_coefficients, fit, fit_cardinality_with, fit_lasso, BranchOptions, lasso_path_to_cardinality, ConstraintSet, Direction, ErrorNorm, LevelBound,
};
use proptest::prelude::*;

fn catalog() -> Vec<BasisFunction> {
    vec![
        BasisFunction::constant(),
        make_normal(),
        make_exponential(),
        make_student_t(3.0).unwrap(),
        make_skewed_t(2.0, 5.0).unwrap(),
        make_skewed_t(0.5, 5.0).unwrap(),
    ]
}

fn sample(seed: u64, n: usize) -> Vec<f64> {
    let truth = FittedModel::new(
        vec![BasisFunction::constant(), make_normal(), make_exponential()],
        vec![0.5, 1.0, 0.8],
    )
    .unwrap();
    truth.sample(n, seed).unwrap()
}

fn problem(seed: u64, weights: WeightSpec) -> mixq::design::DesignProblem {
    build_problem(&sample(seed, 300), &catalog(), &PlottingScheme::Standard, &weights, Exec::Sequential).unwrap()
}

#[test]
fn lasso_penalty_shrinks_support() {
    let prob = problem(1, WeightSpec::Equal);
    let mut last = usize::MAX;
    for lambda in [0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0] {
        let f = fit_lasso(&prob, lambda, ErrorNorm::L2).unwrap();
        assert!(f.active_support.len() <= last);
        last = f.active_support.len();
    }
    assert_eq!(last, 0);
}

#[test]
fn lasso_with_zero_penalty_is_the_nonnegative_fit() {
    let prob = problem(2, WeightSpec::Equal);
    for norm in [ErrorNorm::L2, ErrorNorm::L1] {
        let a = fit_lasso(&prob, 0.0, norm).unwrap();
        let b = fit(&prob, &ConstraintSet::nonneg(), norm).unwrap();
        assert!((a.loss - b.loss).abs() < 1e-9 * (1.0 + b.loss));
    }
}

#[test]
fn lasso_path_reaches_target() {
    let prob = problem(3, WeightSpec::Equal);
    let (lambda, f) = lasso_path_to_cardinality(&prob, 1, 1e-3, ErrorNorm::L2).unwrap();
    assert!(f.active_support.len() <= 1);
    let before = fit_lasso(&prob, lambda - 1e-3, ErrorNorm::L2).unwrap();
    assert!(lambda <= 1e-3 || before.active_support.len() > 1);
}

#[test]
fn cvar_bound_is_respected() {
    let prob = problem(4, WeightSpec::Equal);
    let cat = catalog();
    let free = fit(&prob, &ConstraintSet::nonneg(), ErrorNorm::L2).unwrap();
    let tail = |theta: &[f64]| -> f64 {
        theta.iter().zip(&cat).map(|(t, b)| t * cvar_coefficients(b, 0.95).unwrap()).sum()
    };
    let cap = 0.9 * tail(&free.theta);
    let cons = ConstraintSet {
        cvar: vec![LevelBound { level: 0.95, bound: cap, direction: Direction::AtMost }],
        ..ConstraintSet::nonneg()
    };
    let f = fit(&prob, &cons, ErrorNorm::L2).unwrap();
    assert!(tail(&f.theta) <= cap + 1e-8);
    assert!(f.loss >= free.loss);
}

#[test]
fn cvar_of_exponential_matches_closed_form() {
    // raw tail mean at level p is 1 - ln(1 - p); standardized by the IQR
    let b = make_exponential();
    let p: f64 = 0.9;
    let raw = 1.0 - (1.0 - p).ln();
    let want = (raw - b.shift()) / b.scale();
    assert!((cvar_coefficients(&b, p).unwrap() - want).abs() < 1e-9);
}

#[test]
fn var_bound_at_least() {
    let prob = problem(5, WeightSpec::Equal);
    let cat = catalog();
    let free = fit(&prob, &ConstraintSet::nonneg(), ErrorNorm::L1).unwrap();
    let q99 = FittedModel::from_fit(&cat, &free).unwrap().evaluate(0.99).unwrap();
    let cons = ConstraintSet {
        var: vec![LevelBound { level: 0.99, bound: q99 + 1.0, direction: Direction::AtLeast }],
        ..ConstraintSet::nonneg()
    };
    let f = fit(&prob, &cons, ErrorNorm::L1).unwrap();
    let m = FittedModel::from_fit(&cat, &f).unwrap();
    assert!(m.evaluate(0.99).unwrap() >= q99 + 1.0 - 1e-8);
}

#[test]
fn parallel_branch_and_bound_matches_sequential() {
    let prob = problem(6, WeightSpec::DiagonalPluginNormal);
    let cons = ConstraintSet::with_cardinality(2);
    for norm in [ErrorNorm::L2, ErrorNorm::L1] {
        let seq = BranchOptions { exec: Exec::Sequential, ..BranchOptions::default() };
        let par = BranchOptions { exec: Exec::Parallel, ..BranchOptions::default() };
        let a = fit_cardinality_with(&prob, &cons, norm, seq).unwrap();
        let b = fit_cardinality_with(&prob, &cons, norm, par).unwrap();
        assert_eq!(a.theta, b.theta);
        assert!(a.optimal);
    }
}

#[test]
fn full_and_tridiagonal_weights_fit() {
    for spec in [WeightSpec::FullOptimalPlugin, WeightSpec::DiagonalPluginNormal] {
        let prob = problem(7, spec);
        let f = fit(&prob, &ConstraintSet::nonneg(), ErrorNorm::L2).unwrap();
        assert!(f.kkt_residual < 1e-8, "{}", f.kkt_residual);
        assert!(f.theta[1..].iter().all(|&t| t >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonnegative_fits_satisfy_optimality(seed in 0u64..1000, l1 in any::<bool>()) {
        let prob = problem(seed, WeightSpec::Equal);
        let norm = if l1 { ErrorNorm::L1 } else { ErrorNorm::L2 };
        let f = fit(&prob, &ConstraintSet::nonneg(), norm).unwrap();
        prop_assert!(f.theta[1..].iter().all(|&t| t >= 0.0));
        prop_assert!(f.kkt_residual < 1e-7);
        let free = fit(&prob, &ConstraintSet::none(), norm).unwrap();
        prop_assert!(free.loss <= f.loss * (1.0 + 1e-9) + 1e-12);
    }
}
