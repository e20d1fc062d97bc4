//! Round unit sphere: points, tangent frames, the exponential map and the
//! four points of a table.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit vector in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    /// Normalizes `v`; panics on the zero vector.
    pub fn new(v: Vec3) -> Self {
        let n = norm(v);
        assert!(n > 0.0, "cannot normalize the zero vector");
        Self(scale(v, 1.0 / n))
    }

    pub const NORTH: Self = Self([0.0, 0.0, 1.0]);

    pub fn xyz(&self) -> Vec3 {
        self.0
    }

    pub fn antipode(&self) -> Self {
        Self(scale(self.0, -1.0))
    }

    /// Great-circle distance.
    pub fn distance(&self, other: &Self) -> f64 {
        // atan2 form stays accurate for nearly equal and nearly antipodal points
        norm(cross(self.0, other.0)).atan2(dot(self.0, other.0))
    }

    pub fn chord(&self, other: &Self) -> f64 {
        norm(sub(self.0, other.0))
    }
}

/// Tangent vector `vec` at `base`, with `vec · base = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub vec: Vec3,
}

impl TangentVector {
    pub fn new(base: SpherePoint, vec: Vec3) -> Result<Self> {
        let off = dot(base.0, vec);
        if off.abs() > 1e-12 * (1.0 + norm(vec)) {
            return Err(Error::Degenerate(format!(
                "vector is not tangent (dot with base {off:e})"
            )));
        }
        Ok(Self { base, vec })
    }

    /// Tangential part of an arbitrary ambient vector.
    pub fn projected(base: SpherePoint, v: Vec3) -> Self {
        let vec = sub(v, scale(base.0, dot(base.0, v)));
        Self { base, vec }
    }

    pub fn norm(&self) -> f64 {
        norm(self.vec)
    }
}

/// `cos|v|·x + sin|v|·v/|v|`, defined for `|v| < π`.
pub fn exp_map(v: &TangentVector) -> Result<SpherePoint> {
    let len = v.norm();
    if len >= PI {
        return Err(Error::InjectivityRadiusExceeded { norm: len });
    }
    if len == 0.0 {
        return Ok(v.base);
    }
    let (s, c) = len.sin_cos();
    Ok(SpherePoint::new(add(
        scale(v.base.0, c),
        scale(v.vec, s / len),
    )))
}

/// Inverse of [`exp_map`] away from the cut point.
pub fn log_map(base: &SpherePoint, p: &SpherePoint) -> TangentVector {
    let t = TangentVector::projected(*base, p.0);
    let n = t.norm();
    let angle = base.distance(p);
    if n == 0.0 {
        return TangentVector {
            base: *base,
            vec: [0.0; 3],
        };
    }
    TangentVector {
        base: *base,
        vec: scale(t.vec, angle / n),
    }
}

/// Orthonormal tangent pair at `x`, built from the coordinate axis least
/// aligned with `x` (first axis wins ties). Deterministic, not continuous.
pub fn frame_at(x: &SpherePoint) -> (Vec3, Vec3) {
    let p = x.0;
    let mut axis = 0;
    for i in 1..3 {
        if p[i].abs() < p[axis].abs() {
            axis = i;
        }
    }
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    frame_from(x, a)
}

/// Frame whose first vector is the normalized tangential part of `a`.
pub(crate) fn frame_from(x: &SpherePoint, a: Vec3) -> (Vec3, Vec3) {
    let e1 = TangentVector::projected(*x, a).vec;
    let e1 = scale(e1, 1.0 / norm(e1));
    let e2 = cross(x.0, e1);
    (e1, e2)
}

/// Checks `0 < a ≤ π/2`.
pub fn check_radius(a: f64) -> Result<()> {
    if a > 0.0 && a <= FRAC_PI_2 + 1e-15 {
        Ok(())
    } else {
        Err(Error::RadiusOutOfRange(a))
    }
}

/// `exp(x, ±v)`, `exp(x, ±w)` with `v = a(cos φ e₁ + sin φ e₂)` and `w` the
/// quarter turn of `v`, in the order `v, w, -v, -w`.
pub fn table_points(x: &SpherePoint, a: f64, phi: f64) -> Result<[SpherePoint; 4]> {
    let frame = frame_at(x);
    table_points_in_frame(x, frame, a, phi)
}

pub(crate) fn table_points_in_frame(
    x: &SpherePoint,
    (e1, e2): (Vec3, Vec3),
    a: f64,
    phi: f64,
) -> Result<[SpherePoint; 4]> {
    check_radius(a)?;
    let mut out = [*x; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let (s, c) = (phi + k as f64 * FRAC_PI_2).sin_cos();
        let dir = add(scale(e1, c), scale(e2, s));
        *slot = exp_map(&TangentVector {
            base: *x,
            vec: scale(dir, a),
        })?;
    }
    Ok(out)
}

/// Direction angle of `p` seen from `x` in the frame `(e₁, e₂)`.
pub(crate) fn direction_angle(x: &SpherePoint, (e1, e2): (Vec3, Vec3), p: &SpherePoint) -> f64 {
    let v = log_map(x, p).vec;
    dot(v, e2).atan2(dot(v, e1))
}

/// Deterministic, nearly uniform point set (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            SpherePoint::new([r * c, r * s, z])
        })
        .collect()
}

/// Latitude-longitude grid with cell-centered latitudes (poles excluded).
pub fn lat_lon_grid(n_lat: usize, n_lon: usize) -> Vec<SpherePoint> {
    let mut out = Vec::with_capacity(n_lat * n_lon);
    for i in 0..n_lat {
        let polar = PI * (i as f64 + 0.5) / n_lat as f64;
        for j in 0..n_lon {
            let azimuth = 2.0 * PI * j as f64 / n_lon as f64;
            let (sp, cp) = polar.sin_cos();
            let (sa, ca) = azimuth.sin_cos();
            out.push(SpherePoint::new([sp * ca, sp * sa, cp]));
        }
    }
    out
}

/// Largest distance from a point of one set to the nearest point of the
/// other (symmetric Hausdorff distance of finite sets).
pub fn point_set_distance(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    let one_way = |u: &[SpherePoint], v: &[SpherePoint]| {
        u.iter()
            .map(|p| v.iter().map(|q| p.chord(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
