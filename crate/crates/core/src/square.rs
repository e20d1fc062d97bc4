//! Quadrilaterals inscribed in a star-shaped curve, parametrized by a base
//! angle and four positive angular increments, and the square constraint on
//! them.
//!
//! A [`QuadParam`] `(x, t₀, t₁, t₂, t₃)` with `tᵢ > 0` and `Σtᵢ = 2` places
//! vertices at the angles `x`, `x + πt₀`, `x + π(t₀+t₁)` and
//! `x + π(t₀+t₁+t₂)`. The vertices are therefore always in increasing angular
//! order, so every square in this chart is graceful.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{curve_point, curve_point_and_tangent, RadialFunction};

pub type Point2 = [f64; 2];

/// Tolerance on `|Σtᵢ - 2|` accepted by [`QuadParam::new`].
const SIMPLEX_TOL: f64 = 1e-9;

/// Components of `t` closer than this are treated as tied when choosing the
/// canonical orbit representative.
const CANONICAL_TIE: f64 = 1e-9;

/// Point of `S¹ × Δ̊₃` (increments scaled to sum to 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadParam {
    pub x: f64,
    pub t: [f64; 4],
}

impl QuadParam {
    pub fn new(x: f64, t: [f64; 4]) -> Result<Self> {
        if t.iter().any(|&ti| !(ti > 0.0)) {
            return Err(Error::InvalidParam(format!("non-positive increment in {t:?}")));
        }
        let sum: f64 = t.iter().sum();
        if (sum - 2.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParam(format!("increments sum to {sum}, expected 2")));
        }
        Ok(Self { x, t })
    }

    /// Builds from the three free increments; `t₃ = 2 - t₀ - t₁ - t₂`.
    pub fn from_reduced(x: f64, t0: f64, t1: f64, t2: f64) -> Result<Self> {
        Self::new(x, [t0, t1, t2, 2.0 - t0 - t1 - t2])
    }

    /// The symmetric quadrilateral with all increments `1/2`.
    pub fn regular(x: f64) -> Self {
        Self { x, t: [0.5; 4] }
    }

    /// `(x, t₀, t₁, t₂)`, the unknowns of the square system.
    pub fn reduced(&self) -> [f64; 4] {
        [self.x, self.t[0], self.t[1], self.t[2]]
    }

    /// Vertex angles in parameter order.
    pub fn angles(&self) -> [f64; 4] {
        let mut out = [self.x; 4];
        let mut acc = 0.0;
        for i in 1..4 {
            acc += self.t[i - 1];
            out[i] = self.x + PI * acc;
        }
        out
    }

    /// The cyclic relabeling `[x, (t₀,t₁,t₂,t₃)] ↦ [x + πt₀, (t₁,t₂,t₃,t₀)]`.
    pub fn rotate(&self) -> Self {
        Self {
            x: (self.x + PI * self.t[0]).rem_euclid(TAU),
            t: [self.t[1], self.t[2], self.t[3], self.t[0]],
        }
    }

    /// The four members of the Z₄ orbit, starting with `self` (angle reduced).
    pub fn orbit(&self) -> [Self; 4] {
        let first = Self {
            x: self.x.rem_euclid(TAU),
            t: self.t,
        };
        let second = first.rotate();
        let third = second.rotate();
        let fourth = third.rotate();
        [first, second, third, fourth]
    }

    /// Orbit representative with the lexicographically smallest `t`
    /// (ties broken by the smaller base angle).
    pub fn canonical(&self) -> Self {
        let orbit = self.orbit();
        let mut best = orbit[0];
        for cand in &orbit[1..] {
            if canonical_cmp(cand, &best) == Ordering::Less {
                best = *cand;
            }
        }
        best
    }

    /// Distance in `(x, t)` coordinates, with `x` measured on the circle.
    pub fn distance(&self, other: &Self) -> f64 {
        let dx = angle_diff(self.x, other.x);
        let dt: f64 = self
            .t
            .iter()
            .zip(&other.t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (dx * dx + dt).sqrt()
    }

    /// Distance between Z₄ orbits.
    pub fn orbit_distance(&self, other: &Self) -> f64 {
        self.orbit()
            .iter()
            .map(|p| p.distance(other))
            .fold(f64::INFINITY, f64::min)
    }
}

fn canonical_cmp(a: &QuadParam, b: &QuadParam) -> Ordering {
    for (u, v) in a.t.iter().zip(&b.t) {
        if (u - v).abs() > CANONICAL_TIE {
            return u.partial_cmp(v).unwrap_or(Ordering::Equal);
        }
    }
    a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal)
}

/// Signed difference of two angles, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Vertices of the inscribed quadrilateral, in parameter order.
pub fn quad_vertices(h: &RadialFunction, p: &QuadParam) -> [Point2; 4] {
    p.angles().map(|a| curve_point(h, a))
}

fn dist2(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// `(s₁-s₂, s₂-s₃, s₃-s₄, d₁-d₂)` from squared sides and diagonals.
pub fn residual_of_vertices(v: &[Point2; 4]) -> [f64; 4] {
    let s = [
        dist2(v[0], v[1]),
        dist2(v[1], v[2]),
        dist2(v[2], v[3]),
        dist2(v[3], v[0]),
    ];
    [
        s[0] - s[1],
        s[1] - s[2],
        s[2] - s[3],
        dist2(v[0], v[2]) - dist2(v[1], v[3]),
    ]
}

pub fn square_residual(h: &RadialFunction, p: &QuadParam) -> [f64; 4] {
    residual_of_vertices(&quad_vertices(h, p))
}

/// Derivative of each vertex angle with respect to `(x, t₀, t₁, t₂)`.
const ANGLE_JACOBIAN: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, PI, 0.0, 0.0],
    [1.0, PI, PI, 0.0],
    [1.0, PI, PI, PI],
];

/// Analytic Jacobian of [`square_residual`] with respect to
/// `(x, t₀, t₁, t₂)`, `t₃` eliminated.
pub fn residual_jacobian(h: &RadialFunction, p: &QuadParam) -> Matrix4<f64> {
    let (pts, tans): (Vec<Point2>, Vec<Point2>) = p
        .angles()
        .iter()
        .map(|&a| curve_point_and_tangent(h, a))
        .unzip();
    // gradient of |P_a - P_b|² with respect to the reduced unknowns
    let grad = |a: usize, b: usize| -> [f64; 4] {
        let d = [pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]];
        let da = d[0] * tans[a][0] + d[1] * tans[a][1];
        let db = d[0] * tans[b][0] + d[1] * tans[b][1];
        let mut g = [0.0; 4];
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = 2.0 * (da * ANGLE_JACOBIAN[a][j] - db * ANGLE_JACOBIAN[b][j]);
        }
        g
    };
    let s = [grad(0, 1), grad(1, 2), grad(2, 3), grad(3, 0)];
    let (d1, d2) = (grad(0, 2), grad(1, 3));
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        jac[(0, j)] = s[0][j] - s[1][j];
        jac[(1, j)] = s[1][j] - s[2][j];
        jac[(2, j)] = s[2][j] - s[3][j];
        jac[(3, j)] = d1[j] - d2[j];
    }
    jac
}

/// Smallest singular value of a square matrix.
pub fn sigma_min(m: &Matrix4<f64>) -> f64 {
    m.singular_values().min()
}

pub(crate) fn to_vector(r: [f64; 4]) -> Vector4<f64> {
    Vector4::new(r[0], r[1], r[2], r[3])
}

/// Graceful square found on a star-shaped curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareSolution {
    /// Vertices in the order of the canonical parameter.
    pub vertices: [Point2; 4],
    /// Canonical Z₄ representative.
    pub param: QuadParam,
    pub side: f64,
    pub residual_norm: f64,
    /// Smallest singular value of the residual Jacobian at the root.
    pub jacobian_sigma_min: f64,
}

impl SquareSolution {
    pub fn from_root(h: &RadialFunction, p: &QuadParam) -> Self {
        let param = p.canonical();
        let vertices = quad_vertices(h, &param);
        let residual = residual_of_vertices(&vertices);
        Self {
            vertices,
            param,
            side: dist2(vertices[0], vertices[1]).sqrt(),
            residual_norm: to_vector(residual).norm(),
            jacobian_sigma_min: sigma_min(&residual_jacobian(h, &param)),
        }
    }

    /// Average of the four vertices.
    pub fn center(&self) -> Point2 {
        let mut c = [0.0; 2];
        for v in &self.vertices {
            c[0] += v[0] / 4.0;
            c[1] += v[1] / 4.0;
        }
        c
    }
}

/// Circumcenter of a triangle; `None` when the points are collinear.
fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
    if d.abs() <= 1e-12 * scale {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some([
        a[0] + (cy * b2 - by * c2) / d,
        a[1] + (bx * c2 - cx * b2) / d,
    ])
}

fn angular_order(points: &[Point2; 4], center: Point2) -> [usize; 4] {
    let mut idx = [0, 1, 2, 3];
    let angle = |i: usize| (points[i][1] - center[1]).atan2(points[i][0] - center[0]);
    idx.sort_by(|&i, &j| angle(i).partial_cmp(&angle(j)).unwrap_or(Ordering::Equal));
    idx
}

fn same_cyclic_order(a: &[usize; 4], b: &[usize; 4]) -> bool {
    (0..4).any(|shift| (0..4).all(|i| a[(i + shift) % 4] == b[i]))
}

/// Whether the counter-clockwise order of the points around the origin
/// agrees with their counter-clockwise order around their circumcircle.
pub fn classify_graceful(vertices: &[Point2; 4]) -> Result<bool> {
    let [a, b, c, d] = *vertices;
    let center = circumcenter(a, b, c)
        .or_else(|| circumcenter(a, b, d))
        .ok_or_else(|| Error::Degenerate("collinear vertices".into()))?;
    Ok(same_cyclic_order(
        &angular_order(vertices, [0.0, 0.0]),
        &angular_order(vertices, center),
    ))
}
