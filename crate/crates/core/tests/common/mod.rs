//! Independent reference computations for the integration tests.
//!
//! Nothing here calls the solvers under test. The brute-force square search
//! works directly on vertex angles with its own residual and finite-difference
//! Newton, and the table checks recompute geodesic logs and field values from
//! scratch.

#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{Matrix4, Vector4};
use squarepeg::harmonics::ScalarField;
use squarepeg::radial::RadialFunction;
use squarepeg::table::TableSolution;

pub type P2 = [f64; 2];
pub type V3 = [f64; 3];

/// Inscribed square found by the brute-force search, vertices in
/// counter-clockwise angular order.
#[derive(Debug, Clone)]
pub struct OracleSquare {
    pub angles: [f64; 4],
    pub vertices: [P2; 4],
}

fn point(h: &RadialFunction, angle: f64) -> P2 {
    let r = h.evaluate(angle);
    [r * angle.cos(), r * angle.sin()]
}

fn d2(a: P2, b: P2) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Equal sides and equal diagonals for the quadrilateral `v₀v₁v₂v₃`, raw.
fn raw_defect(v: &[P2; 4]) -> [f64; 4] {
    let s = [d2(v[0], v[1]), d2(v[1], v[2]), d2(v[2], v[3]), d2(v[3], v[0])];
    [s[0] - s[1], s[1] - s[2], s[2] - s[3], d2(v[0], v[2]) - d2(v[1], v[3])]
}

/// Scale-free version: raw defect over the mean squared side, so that
/// collapsed quadrilaterals do not look like roots.
fn defect(v: &[P2; 4]) -> Vector4<f64> {
    let mean = (d2(v[0], v[1]) + d2(v[1], v[2]) + d2(v[2], v[3]) + d2(v[3], v[0])) / 4.0;
    let r = raw_defect(v);
    Vector4::new(r[0], r[1], r[2], r[3]) / mean
}

fn vertices_at(h: &RadialFunction, angles: &[f64; 4]) -> [P2; 4] {
    angles.map(|a| point(h, a))
}

fn ordered(angles: &[f64; 4], min_gap: f64) -> bool {
    angles[1] - angles[0] > min_gap
        && angles[2] - angles[1] > min_gap
        && angles[3] - angles[2] > min_gap
        && angles[0] + TAU - angles[3] > min_gap
}

/// Damped Gauss-Newton on the scale-free defect with a central-difference
/// Jacobian in the four vertex angles.
fn refine(h: &RadialFunction, start: [f64; 4]) -> Option<[f64; 4]> {
    let eval = |a: &[f64; 4]| defect(&vertices_at(h, a));
    let mut a = start;
    let mut r = eval(&a);
    for _ in 0..100 {
        if r.norm() < 1e-13 {
            break;
        }
        let step_fd = 1e-7;
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let mut plus = a;
            let mut minus = a;
            plus[j] += step_fd;
            minus[j] -= step_fd;
            jac.set_column(j, &((eval(&plus) - eval(&minus)) / (2.0 * step_fd)));
        }
        let step = jac.svd(true, true).solve(&(-r), 1e-14).ok()?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [
                a[0] + lambda * step[0],
                a[1] + lambda * step[1],
                a[2] + lambda * step[2],
                a[3] + lambda * step[3],
            ];
            if ordered(&cand, 0.0) {
                let rc = eval(&cand);
                if rc.norm() < r.norm() {
                    a = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let v = vertices_at(h, &a);
    let side2 = d2(v[0], v[1]);
    let raw = raw_defect(&v).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    (raw <= 1e-11 * side2 && ordered(&a, 1e-3)).then_some(a)
}

/// Largest vertex distance under the best cyclic relabeling.
pub fn cyclic_distance(a: &[P2; 4], b: &[P2; 4]) -> f64 {
    (0..4)
        .map(|shift| (0..4).map(|i| d2(a[i], b[(i + shift) % 4]).sqrt()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Every inscribed square whose vertices appear in the same cyclic order on
/// the curve as on the square, found by scanning all ordered quadruples of
/// `n` equally spaced angles for local minima of the defect and refining each.
pub fn brute_force_squares(h: &RadialFunction, n: usize) -> Vec<OracleSquare> {
    let pts: Vec<P2> = (0..n).map(|k| point(h, TAU * k as f64 / n as f64)).collect();
    let n_i = n as i64;
    let value = |idx: &[i64; 4]| -> f64 {
        let v = idx.map(|i| pts[i.rem_euclid(n_i) as usize]);
        defect(&v).norm_squared()
    };
    let valid = |idx: &[i64; 4]| idx[0] < idx[1] && idx[1] < idx[2] && idx[2] < idx[3] && idx[3] < idx[0] + n_i;

    let mut minima = Vec::new();
    for i0 in 0..n_i {
        for i1 in i0 + 1..i0 + n_i {
            for i2 in i1 + 1..i0 + n_i {
                for i3 in i2 + 1..i0 + n_i {
                    let idx = [i0, i1, i2, i3];
                    let v = value(&idx);
                    let mut is_min = true;
                    'nbr: for code in 0..81 {
                        if code == 40 {
                            continue;
                        }
                        let mut c = code;
                        let mut nb = idx;
                        for k in nb.iter_mut() {
                            *k += c % 3 - 1;
                            c /= 3;
                        }
                        if valid(&nb) && value(&nb) < v {
                            is_min = false;
                            break 'nbr;
                        }
                    }
                    if is_min {
                        minima.push(idx.map(|i| TAU * i as f64 / n as f64));
                    }
                }
            }
        }
    }

    let mut found: Vec<OracleSquare> = Vec::new();
    for start in minima {
        let Some(angles) = refine(h, start) else { continue };
        let vertices = vertices_at(h, &angles);
        if found.iter().all(|s| cyclic_distance(&s.vertices, &vertices) > 1e-6) {
            found.push(OracleSquare { angles, vertices });
        }
    }
    found
}

fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Geodesic log at `x` computed from scratch.
pub fn log_at(x: V3, p: V3) -> V3 {
    let c = dot3(x, p).clamp(-1.0, 1.0);
    let perp = [p[0] - c * x[0], p[1] - c * x[1], p[2] - c * x[2]];
    let n = dot3(perp, perp).sqrt();
    if n == 0.0 {
        return [0.0; 3];
    }
    let angle = c.acos();
    perp.map(|v| angle * v / n)
}

/// Geometric and value defects of a table, measured independently.
#[derive(Debug, Clone, Copy)]
pub struct TableCheck {
    /// `max f - min f` over the four points.
    pub spread: f64,
    /// How far the tangent vectors are from `±v, ±w` with `|v| = |w| = a`
    /// and `v ⟂ w`, relative to `a`.
    pub square_defect: f64,
}

pub fn check_table(f: &ScalarField, t: &TableSolution) -> TableCheck {
    let x = t.x.xyz();
    let values: Vec<f64> = t.points.iter().map(|p| f.eval(p)).collect();
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let logs: Vec<V3> = t.points.iter().map(|p| log_at(x, p.xyz())).collect();
    let a = t.a;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let v = logs[i];
        let next = logs[(i + 1) % 4];
        let opposite = logs[(i + 2) % 4];
        worst = worst.max((dot3(v, v).sqrt() - a).abs() / a);
        worst = worst.max(dot3(v, next).abs() / (a * a));
        let sum = [v[0] + opposite[0], v[1] + opposite[1], v[2] + opposite[2]];
        worst = worst.max(dot3(sum, sum).sqrt() / a);
    }
    TableCheck { spread, square_defect: worst }
}

/// Largest distance between matched points of two four-point sets, under the
/// best of the 24 matchings.
pub fn set_distance(a: &[V3; 4], b: &[V3; 4]) -> f64 {
    let mut best = f64::INFINITY;
    let mut perm = [0, 1, 2, 3];
    permute(&mut perm, 0, &mut |p| {
        let d = (0..4)
            .map(|i| {
                let (u, v) = (a[i], b[p[i]]);
                ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

fn permute(p: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
    if k == 4 {
        visit(p);
        return;
    }
    for i in k..4 {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}
