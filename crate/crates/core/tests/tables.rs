mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use squarepeg::fixtures::even_fields;
use squarepeg::harmonics::Shifted;
use squarepeg::peg::SolveConfig;
use squarepeg::sphere::{exp_map, frame_at, table_points, SpherePoint, TangentVector};
use squarepeg::table::{
    antipodal_transport, fiber_graceful_squares, find_tables_direct, find_tables_via_center, positivity_shift,
};

fn arb_point() -> impl Strategy<Value = SpherePoint> {
    [-1.0..1.0f64, -1.0..1.0, -1.0..1.0]
        .prop_filter("away from the origin", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(SpherePoint::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn great_circle_tables_are_orthogonal_to_the_center(x in arb_point(), phi in 0.0..FRAC_PI_2) {
        for p in table_points(&x, FRAC_PI_2, phi).unwrap() {
            let dot: f64 = p.xyz().iter().zip(x.xyz()).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn exp_is_lipschitz(x in arb_point(), a in [-1.4..1.4f64, -1.4..1.4, -1.4..1.4], d in [-1e-3..1e-3f64, -1e-3..1e-3, -1e-3..1e-3]) {
        let v = TangentVector::projected(x, a);
        let w = TangentVector::projected(x, [a[0] + d[0], a[1] + d[1], a[2] + d[2]]);
        prop_assume!(v.norm() < PI && w.norm() < PI);
        let diff: Vec<f64> = v.vec.iter().zip(w.vec).map(|(p, q)| p - q).collect();
        let dv = diff.iter().map(|c| c * c).sum::<f64>().sqrt();
        let (p, q) = (exp_map(&v).unwrap(), exp_map(&w).unwrap());
        prop_assert!(p.chord(&q) <= (1.0 + v.norm()) * dv + 1e-15);
    }

    #[test]
    fn even_fixtures_are_antipodally_symmetric(x in arb_point()) {
        for f in even_fields() {
            prop_assert!((f.eval(&x) - f.eval(&x.antipode())).abs() < 1e-12);
        }
    }
}

#[test]
fn even_fixtures_have_tables_on_great_circles() {
    let cfg = SolveConfig::default();
    for (i, f) in even_fields().iter().enumerate() {
        let tables = find_tables_direct(f, FRAC_PI_2, &cfg).unwrap();
        let verified = tables.iter().filter(|t| common::check_table(f, t).spread < 1e-8).count();
        assert!(verified >= 1, "field {i}");
    }
}

#[test]
fn direct_tables_come_in_antipodal_pairs() {
    let cfg = SolveConfig::default();
    let f = &even_fields()[1];
    let tables = find_tables_direct(f, PI / 5.0, &cfg).unwrap();
    assert!(!tables.is_empty());
    for t in &tables {
        let twin = antipodal_transport(f, t).unwrap();
        let back = antipodal_transport(f, &twin).unwrap();
        assert!(common::set_distance(&back.points.map(|p| p.xyz()), &t.points.map(|p| p.xyz())) < 1e-12);
        let listed = tables
            .iter()
            .map(|u| common::set_distance(&u.points.map(|p| p.xyz()), &twin.points.map(|p| p.xyz())))
            .fold(f64::INFINITY, f64::min);
        assert!(listed < 1e-8, "companion {listed:.2e} from the found set");
    }
}

/// Moving the base point off a table by `δ` gives a fiber square with center
/// of order `δ` and radial spread of the same order, in a fixed ratio.
#[test]
fn spread_vanishes_linearly_with_the_center() {
    let cfg = SolveConfig::default();
    let f = &even_fields()[0];
    let a = PI / 6.0;
    let shifted = Shifted { field: f, offset: positivity_shift(f) };
    let table = find_tables_via_center(f, a, &cfg).unwrap().tables.remove(0);
    let (e1, _) = frame_at(&table.x);

    let mut ratios = Vec::new();
    for delta in [1e-2, 1e-3, 1e-4] {
        let x = exp_map(&TangentVector::projected(table.x, e1.map(|c| c * delta))).unwrap();
        let squares = fiber_graceful_squares(&shifted, &x, a, &cfg).unwrap();
        let (square, center) = squares
            .iter()
            .min_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
            .unwrap();
        let radii: Vec<f64> = square.vertices.iter().map(|v| v[0].hypot(v[1])).collect();
        let spread = radii.iter().cloned().fold(f64::MIN, f64::max) - radii.iter().cloned().fold(f64::MAX, f64::min);
        assert!(center.norm() < 10.0 * delta && center.norm() > 0.0);
        ratios.push(spread / center.norm());
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(l, h), r| (l.min(*r), h.max(*r)));
    assert!(hi.is_finite() && hi <= 2.0 * lo, "spread/center ratios {ratios:?}");
}
