mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squarepeg::fixtures::random_curve;
use squarepeg::peg::{
    continue_from_ellipse, find_graceful_squares, parity, parity_with_squares, SolveConfig, BASIN_BOUND,
};
use squarepeg::radial::{RadialFunction, StarCurve};
use squarepeg::square::{classify_graceful, residual_jacobian, square_residual, QuadParam};

/// Target curve whose path from the ellipse passes two folds.
const FOLD_SEED: u64 = 35;

fn perturbed(h: &RadialFunction, seed: u64, size: f64) -> RadialFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jiggle = |c: &f64| c + rng.random_range(-size..=size);
    RadialFunction::new(h.cos_coeffs.iter().map(&mut jiggle).collect(), h.sin_coeffs.iter().map(&mut jiggle).collect())
}

fn arb_param() -> impl Strategy<Value = QuadParam> {
    (0.0..std::f64::consts::TAU, [0.05..1.0f64, 0.05..1.0, 0.05..1.0, 0.05..1.0]).prop_map(|(x, t)| {
        let total: f64 = t.iter().sum();
        QuadParam { x, t: t.map(|ti| 2.0 * ti / total) }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_stays_above_the_certified_minimum(seed in 0u64..10_000, theta in -20.0..20.0f64) {
        let curve = StarCurve::new(random_curve(seed)).unwrap();
        prop_assert!(curve.certified_min() > 0.0);
        prop_assert!(curve.radial().evaluate(theta) >= curve.certified_min());
    }

    #[test]
    fn derivative_matches_central_difference(
        cos in prop::collection::vec(-1.0..1.0f64, 1..16),
        sin in prop::collection::vec(-1.0..1.0f64, 1..16),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let h = RadialFunction::new(cos, sin);
        let eps = 1e-5;
        let fd = (h.evaluate(theta + eps) - h.evaluate(theta - eps)) / (2.0 * eps);
        prop_assert!((fd - h.derivative(theta)).abs() < 1e-7);
    }

    #[test]
    fn jacobian_matches_central_difference(seed in 0u64..10_000, p in arb_param()) {
        let h = random_curve(seed);
        let jac = residual_jacobian(&h, &p);
        let step = 1e-6;
        let base = [p.x, p.t[0], p.t[1], p.t[2]];
        for j in 0..4 {
            let shifted = |d: f64| {
                let mut y = base;
                y[j] += d;
                square_residual(&h, &QuadParam { x: y[0], t: [y[1], y[2], y[3], 2.0 - y[1] - y[2] - y[3]] })
            };
            let (plus, minus) = (shifted(step), shifted(-step));
            for i in 0..4 {
                let fd = (plus[i] - minus[i]) / (2.0 * step);
                prop_assert!((fd - jac[(i, j)]).abs() < 1e-5, "entry ({i}, {j}): fd {fd}, analytic {}", jac[(i, j)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn roots_are_graceful_and_z4_free(seed in 0u64..10_000) {
        let h = random_curve(seed);
        let cfg = SolveConfig::default();
        for s in find_graceful_squares(&h, &cfg).unwrap() {
            prop_assert!(classify_graceful(&s.vertices).unwrap());
            let r = square_residual(&h, &s.param);
            prop_assert!(r.iter().all(|v| v.abs() < 1e-10));
            let image = s.param.rotate();
            prop_assert!(image.distance(&s.param) > cfg.dedupe_tol);
        }
    }
}

#[test]
fn parity_survives_small_perturbations() {
    let cfg = SolveConfig::default();
    for seed in [0, 7, 11, 19] {
        let h = random_curve(seed);
        let before = parity(&h, &cfg).unwrap();
        for k in 0..3 {
            let after = parity(&perturbed(&h, 100 * seed + k, 1e-6), &cfg).unwrap();
            assert_eq!(after.parity, before.parity, "seed {seed}, perturbation {k}");
            assert_eq!((after.count as i64 - before.count as i64) % 2, 0);
        }
    }
}

#[test]
fn search_is_deterministic() {
    let cfg = SolveConfig::default();
    let h = random_curve(11);
    let first = find_graceful_squares(&h, &cfg).unwrap();
    let second = find_graceful_squares(&h, &cfg).unwrap();
    assert_eq!(first, second);
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.param.x.to_bits(), b.param.x.to_bits());
    }
}

#[test]
fn fold_target_crosses_folds_and_keeps_parity() {
    let cfg = SolveConfig::default();
    let h = random_curve(FOLD_SEED);
    let trace = continue_from_ellipse(&h, &cfg, 40).unwrap();
    assert!(!trace.folds.is_empty());
    for fold in &trace.folds {
        assert!(fold.sigma_min < cfg.genericity_floor, "fold sigma_min {:.2e}", fold.sigma_min);
        assert!((0.0..=1.0).contains(&fold.s));
    }
    for pair in trace.samples.windows(2) {
        assert!(pair[1].param.distance(&pair[0].param) < BASIN_BOUND);
    }
    let (report, squares) = parity_with_squares(&h, &cfg).unwrap();
    assert_eq!(report.parity, 1);
    let nearest = squares
        .iter()
        .map(|s| s.param.orbit_distance(&trace.endpoint.param))
        .fold(f64::INFINITY, f64::min);
    assert!(nearest < cfg.dedupe_tol);
}

#[test]
fn oracle_agrees_on_a_three_square_curve() {
    let h = random_curve(11);
    let found = find_graceful_squares(&h, &SolveConfig::default()).unwrap();
    let oracle = common::brute_force_squares(&h, 48);
    assert_eq!(found.len(), 3);
    assert_eq!(oracle.len(), found.len());
    for s in &found {
        let best = oracle
            .iter()
            .map(|o| common::cyclic_distance(&o.vertices, &s.vertices))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "{best:.2e}");
    }
}
