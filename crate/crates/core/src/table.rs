//! Tables: squares of fixed radius on the sphere with equal field values at
//! the four vertices.
//!
//! Two independent routes are provided. The direct route runs Newton on the
//! three value differences over `(x, φ)`. The fiber route deforms the radius
//! `a` circle in each tangent plane by the field, finds graceful squares of
//! the resulting star-shaped curve and drives their center to zero; a
//! graceful fiber square centered at the origin is a table.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Representative, Result};
use crate::harmonics::{Shifted, SphereField};
use crate::peg::{self, SolveConfig, MIN_INCREMENT};
use crate::radial::RadialFunction;
use crate::sphere::{
    add, check_radius, direction_angle, exp_map, fibonacci_sphere, frame_at, frame_from,
    lat_lon_grid, point_set_distance, scale, table_points, table_points_in_frame, SpherePoint,
    TangentVector, Vec3,
};
use crate::square::{residual_of_vertices, Point2, QuadParam, SquareSolution};

/// Grid on which fiber fits are checked.
pub const FIT_GRID: usize = 1024;
/// Largest accepted deviation of a fiber fit from the exact radial values.
pub const FIT_TOL: f64 = 1e-9;
const FIT_DEGREES: [usize; 4] = [8, 16, 32, 64];

/// Center norm below which the table certificate is enforced.
pub const CERTIFICATE_CENTER: f64 = 1e-8;
/// Value spread the certificate allows at a certified center.
pub const CERTIFICATE_SPREAD: f64 = 1e-6;
/// Largest deviation of the four directions from quarter turns.
pub const CERTIFICATE_SQUARE: f64 = 1e-8;

const FD_STEP: f64 = 1e-6;
const STEP_TOL: f64 = 1e-7;
const MAX_ITER: usize = 50;
const SHIFT_SAMPLES: usize = 2000;

/// A table of radius `a` centered at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSolution {
    pub x: SpherePoint,
    pub a: f64,
    /// Angle of `v` in the frame [`frame_at`]`(x)`, in `[0, π/2)`.
    pub phi: f64,
    /// `exp(x, v)`, `exp(x, w)`, `exp(x, -v)`, `exp(x, -w)`.
    pub points: [SpherePoint; 4],
    /// `max f(pᵢ) - min f(pᵢ)`.
    pub value_spread: f64,
    /// Norm of the center map when the table came from the fiber route.
    pub center_norm: Option<f64>,
}

/// `(f(p₁) - f(p₂), f(p₂) - f(p₃), f(p₃) - f(p₄))` at the table `(x, a, φ)`.
pub fn table_residual<F: SphereField + ?Sized>(f: &F, x: &SpherePoint, a: f64, phi: f64) -> Result<[f64; 3]> {
    let pts = table_points(x, a, phi)?;
    Ok(differences(f, &pts))
}

fn differences<F: SphereField + ?Sized>(f: &F, pts: &[SpherePoint; 4]) -> [f64; 3] {
    let v = pts.map(|p| f.value(&p));
    [v[0] - v[1], v[1] - v[2], v[2] - v[3]]
}

fn spread<F: SphereField + ?Sized>(f: &F, pts: &[SpherePoint; 4]) -> f64 {
    let v = pts.map(|p| f.value(&p));
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Builds the canonical solution record for the square through `first`.
fn table_through<F: SphereField + ?Sized>(
    f: &F,
    x: SpherePoint,
    a: f64,
    first: &SpherePoint,
    center_norm: Option<f64>,
) -> Result<TableSolution> {
    let phi = direction_angle(&x, frame_at(&x), first).rem_euclid(FRAC_PI_2);
    // rem_euclid may round up to the modulus itself
    let phi = if phi >= FRAC_PI_2 { 0.0 } else { phi };
    let points = table_points(&x, a, phi)?;
    Ok(TableSolution {
        x,
        a,
        phi,
        points,
        value_spread: spread(f, &points),
        center_norm,
    })
}

/// The table at `-x` through the antipodes of the original points. For an
/// even field it is again a table with the same value spread.
pub fn antipodal_transport<F: SphereField + ?Sized>(f: &F, sol: &TableSolution) -> Result<TableSolution> {
    if !f.is_even() {
        return Err(Error::EvennessRequired);
    }
    table_through(f, sol.x.antipode(), sol.a, &sol.points[0].antipode(), sol.center_norm)
}

/// Constant added to `f` so that it is at least 1 on a dense sample.
pub fn positivity_shift<F: SphereField + ?Sized>(f: &F) -> f64 {
    let min = fibonacci_sphere(SHIFT_SAMPLES)
        .iter()
        .map(|p| f.value(p))
        .fold(f64::INFINITY, f64::min);
    1.0 + min.abs()
}

/// Base point with a tangent frame, used as a chart that is re-centered
/// after every Newton step.
#[derive(Debug, Clone, Copy)]
struct Chart {
    x: SpherePoint,
    e1: Vec3,
    e2: Vec3,
}

impl Chart {
    fn at(x: SpherePoint) -> Self {
        let (e1, e2) = frame_at(&x);
        Self { x, e1, e2 }
    }

    fn tangent(&self, c1: f64, c2: f64) -> Vec3 {
        add(scale(self.e1, c1), scale(self.e2, c2))
    }

    /// Chart at `exp(x, u₁e₁ + u₂e₂)` with `e₁` carried along by projection.
    fn moved(&self, u1: f64, u2: f64) -> Option<Self> {
        let y = exp_map(&TangentVector { base: self.x, vec: self.tangent(u1, u2) }).ok()?;
        let (e1, e2) = frame_from(&y, self.e1);
        e1.iter().all(|c| c.is_finite()).then_some(Self { x: y, e1, e2 })
    }

    fn table(&self, a: f64, phi: f64) -> Option<[SpherePoint; 4]> {
        table_points_in_frame(&self.x, (self.e1, self.e2), a, phi).ok()
    }

    fn direction(&self, theta: f64) -> Vec3 {
        self.tangent(theta.cos(), theta.sin())
    }
}

/// Damped Newton with a central-difference Jacobian and a truncated-SVD
/// step. `apply` moves the state by a local increment; `eval` is the
/// residual at a state.
fn local_newton<S: Clone>(
    start: S,
    dim: usize,
    apply: impl Fn(&S, &DVector<f64>) -> Option<S>,
    eval: impl Fn(&S) -> Option<DVector<f64>>,
    tol: f64,
) -> Option<(S, f64)> {
    let mut state = start;
    let mut r = eval(&state)?;
    for _ in 0..MAX_ITER {
        let mut jac = DMatrix::zeros(r.len(), dim);
        for j in 0..dim {
            let mut d = DVector::zeros(dim);
            d[j] = FD_STEP;
            let plus = eval(&apply(&state, &d)?)?;
            d[j] = -FD_STEP;
            let minus = eval(&apply(&state, &d)?)?;
            jac.set_column(j, &((plus - minus) / (2.0 * FD_STEP)));
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let step = svd.solve(&(-&r), cutoff).ok()?;
        let norm = r.norm();
        if norm <= tol && step.norm() <= STEP_TOL {
            return Some((state, norm));
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            if let Some(next) = apply(&state, &(&step * lambda)) {
                if let Some(next_r) = eval(&next) {
                    if next_r.norm() < norm || norm == 0.0 {
                        accepted = Some((next, next_r));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let (next, next_r) = accepted?;
        state = next;
        r = next_r;
    }
    let norm = r.norm();
    (norm <= tol).then_some((state, norm))
}

fn compare_tables(a: &TableSolution, b: &TableSolution) -> Ordering {
    let ka = a.x.xyz().into_iter().chain([a.phi]);
    let kb = b.x.xyz().into_iter().chain([b.phi]);
    ka.zip(kb)
        .map(|(u, v)| u.total_cmp(&v))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Drops tables whose point sets lie within `tol` of an earlier one, then
/// sorts by base point and angle.
pub fn dedupe_tables(tables: impl IntoIterator<Item = TableSolution>, tol: f64) -> Vec<TableSolution> {
    let mut kept: Vec<TableSolution> = Vec::new();
    for t in tables {
        if kept.iter().all(|k| point_set_distance(&k.points, &t.points) >= tol) {
            kept.push(t);
        }
    }
    kept.sort_by(compare_tables);
    kept
}

fn constant_family<F: SphereField + ?Sized>(f: &F, a: f64, center_norm: Option<f64>) -> Result<TableSolution> {
    let x = SpherePoint::NORTH;
    let first = table_points(&x, a, 0.0)?[0];
    table_through(f, x, a, &first, center_norm)
}

/// Seeds for the direct solver: a Fibonacci lattice of `4·grid_density`
/// base points times `grid_density / 4` frame angles.
fn direct_seeds(cfg: &SolveConfig) -> Vec<(SpherePoint, f64)> {
    let bases = fibonacci_sphere(4 * cfg.grid_density.max(1));
    let n_phi = (cfg.grid_density / 4).max(1);
    bases
        .into_iter()
        .flat_map(|x| (0..n_phi).map(move |k| (x, FRAC_PI_2 * k as f64 / n_phi as f64)))
        .collect()
}

/// Tables of radius `a` by multi-start Newton on the value differences.
///
/// Existence is guaranteed for even fields and for `a = π/2`; an empty
/// result in those cases is a coverage failure.
pub fn find_tables_direct<F: SphereField + ?Sized>(f: &F, a: f64, cfg: &SolveConfig) -> Result<Vec<TableSolution>> {
    check_radius(a)?;
    if f.is_constant() {
        return Err(Error::DegenerateFamily {
            roots: 0,
            representative: Box::new(Representative::Table(constant_family(f, a, None)?)),
        });
    }
    let found: Vec<Option<TableSolution>> = direct_seeds(cfg)
        .par_iter()
        .map(|&(x, phi)| solve_direct(f, a, x, phi, cfg))
        .collect();
    let tables = dedupe_tables(found.into_iter().flatten(), cfg.dedupe_tol);
    let guaranteed = f.is_even() || (a - FRAC_PI_2).abs() < 1e-12;
    if tables.is_empty() && guaranteed {
        return Err(Error::SolverCoverageFailure);
    }
    Ok(tables)
}

fn solve_direct<F: SphereField + ?Sized>(f: &F, a: f64, x: SpherePoint, phi: f64, cfg: &SolveConfig) -> Option<TableSolution> {
    let apply = |(chart, phi): &(Chart, f64), d: &DVector<f64>| Some((chart.moved(d[0], d[1])?, phi + d[2]));
    let eval = |(chart, phi): &(Chart, f64)| {
        let pts = chart.table(a, *phi)?;
        Some(DVector::from_row_slice(&differences(f, &pts)))
    };
    let ((chart, phi), _) = local_newton((Chart::at(x), phi), 3, apply, eval, cfg.newton_tol)?;
    let first = chart.table(a, phi)?[0];
    table_through(f, chart.x, a, &first, None).ok()
}

/// Star-shaped curve in the tangent plane at `x`: the radius `a` circle
/// with each direction scaled by the field value at the geodesic endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberCurve {
    pub x: SpherePoint,
    pub a: f64,
    /// Frame of the tangent plane, [`frame_at`]`(x)`.
    pub frame: (Vec3, Vec3),
    pub radial: RadialFunction,
    /// Largest deviation of `radial` from the exact values on [`FIT_GRID`].
    pub fit_residual: f64,
}

/// Exact radial value of the fiber curve at `θ` in the frame of `chart`.
fn fiber_radius<F: SphereField + ?Sized>(f: &F, chart: &Chart, a: f64, theta: f64) -> Option<f64> {
    let p = exp_map(&TangentVector { base: chart.x, vec: scale(chart.direction(theta), a) }).ok()?;
    Some(a * f.value(&p))
}

/// Fourier fit of `θ ↦ a·f(exp(x, a(cos θ e₁ + sin θ e₂)))`, raising the
/// degree until the fit is within [`FIT_TOL`].
pub fn fiber_curve_at<F: SphereField + ?Sized>(f: &F, x: &SpherePoint, a: f64) -> Result<FiberCurve> {
    check_radius(a)?;
    let chart = Chart::at(*x);
    let exact = |theta: f64| fiber_radius(f, &chart, a, theta).unwrap_or(f64::NAN);
    let mut worst = (f64::INFINITY, 0);
    for degree in FIT_DEGREES {
        let radial = RadialFunction::fit(exact, degree);
        let fit_residual = radial.max_deviation(exact, FIT_GRID);
        if fit_residual < FIT_TOL {
            return Ok(FiberCurve { x: *x, a, frame: (chart.e1, chart.e2), radial, fit_residual });
        }
        worst = (fit_residual, degree);
    }
    Err(Error::FitFailure { residual: worst.0, degree: worst.1 })
}

/// Mean of the four vertices of a fiber square, in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterValue(pub [f64; 2]);

impl CenterValue {
    pub fn of(vertices: &[Point2; 4]) -> Self {
        let sum = vertices.iter().fold([0.0, 0.0], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        Self([sum[0] / 4.0, sum[1] / 4.0])
    }

    pub fn norm(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }
}

/// Graceful squares of the fiber curve at `x`, each with its center.
pub fn fiber_graceful_squares<F: SphereField + ?Sized>(
    f: &F,
    x: &SpherePoint,
    a: f64,
    cfg: &SolveConfig,
) -> Result<Vec<(SquareSolution, CenterValue)>> {
    let curve = fiber_curve_at(f, x, a)?;
    let squares = peg::find_graceful_squares(&curve.radial, cfg)?;
    Ok(squares
        .into_iter()
        .map(|s| {
            let c = CenterValue::of(&s.vertices);
            (s, c)
        })
        .collect())
}

/// Tracked square changed discontinuously between neighboring base points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchJump {
    pub from: SpherePoint,
    pub to: SpherePoint,
    /// Distance between the tracked square and its nearest successor.
    pub gap: f64,
}

/// Output of the fiber route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSearch {
    pub tables: Vec<TableSolution>,
    pub branch_jumps: Vec<BranchJump>,
}

/// Base points visited row by row, alternating direction.
fn serpentine(n_lat: usize, n_lon: usize) -> Vec<SpherePoint> {
    let grid = lat_lon_grid(n_lat, n_lon);
    let mut out = Vec::with_capacity(grid.len());
    for (i, row) in grid.chunks(n_lon).enumerate() {
        if i % 2 == 0 {
            out.extend_from_slice(row);
        } else {
            out.extend(row.iter().rev());
        }
    }
    out
}

/// Fiber square at one base point, kept with its chart for seeding.
#[derive(Debug, Clone)]
struct FiberSeed {
    chart: Chart,
    param: QuadParam,
    center: f64,
    /// Vertices lifted to `ℝ³` as `x + v`, for comparing across base points.
    lifted: [Vec3; 4],
}

fn lift(chart: &Chart, vertices: &[Point2; 4]) -> [Vec3; 4] {
    vertices.map(|v| add(chart.x.xyz(), chart.tangent(v[0], v[1])))
}

fn lifted_distance(a: &[Vec3; 4], b: &[Vec3; 4]) -> f64 {
    let nearest = |p: &Vec3, set: &[Vec3; 4]| {
        set.iter()
            .map(|q| (0..3).map(|i| (p[i] - q[i]).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    let one = a.iter().map(|p| nearest(p, b)).fold(0.0, f64::max);
    let other = b.iter().map(|p| nearest(p, a)).fold(0.0, f64::max);
    one.max(other)
}

/// Vertices of the quadrilateral `param` on the exact fiber curve of `chart`.
fn fiber_vertices<F: SphereField + ?Sized>(f: &F, chart: &Chart, a: f64, param: &QuadParam) -> Option<[Point2; 4]> {
    let angles = param.angles();
    let mut out = [[0.0; 2]; 4];
    for (slot, theta) in out.iter_mut().zip(angles) {
        let r = fiber_radius(f, chart, a, theta)?;
        *slot = [r * theta.cos(), r * theta.sin()];
    }
    Some(out)
}

/// Tables of radius `a` from graceful fiber squares with vanishing center.
///
/// Base points come from a `grid_density/2 × grid_density` latitude-longitude
/// grid walked in serpentine order. At each one the graceful squares of the
/// fiber curve are found; the square nearest the previously tracked one is
/// followed and discontinuities are reported as [`BranchJump`]s. Every fiber
/// square then seeds a joint Newton solve for the base point and the square
/// with center zero. Accepted roots are checked against the table
/// certificate.
pub fn find_tables_via_center<F: SphereField + ?Sized>(f: &F, a: f64, cfg: &SolveConfig) -> Result<CenterSearch> {
    check_radius(a)?;
    let shifted = Shifted { field: f, offset: positivity_shift(f) };
    if f.is_constant() {
        return Ok(CenterSearch {
            tables: vec![constant_family(f, a, Some(0.0))?],
            branch_jumps: Vec::new(),
        });
    }
    let n_lon = cfg.grid_density.max(2);
    let bases = serpentine((n_lon / 2).max(1), n_lon);

    let per_base: Vec<Vec<FiberSeed>> = bases
        .par_iter()
        .map(|x| {
            let chart = Chart::at(*x);
            fiber_graceful_squares(&shifted, x, a, cfg)
                .map(|squares| {
                    squares
                        .into_iter()
                        .map(|(s, c)| FiberSeed { chart, param: s.param, center: c.norm(), lifted: lift(&chart, &s.vertices) })
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();

    let (order, branch_jumps) = track_branch(&bases, &per_base, a);

    let solved = order
        .par_iter()
        .map(|seed| solve_center(&shifted, a, seed, cfg))
        .collect::<Result<Vec<_>>>()?;
    let tables = dedupe_tables(
        solved.into_iter().flatten().map(|mut t| {
            t.value_spread = spread(f, &t.points);
            t
        }),
        cfg.dedupe_tol,
    );
    Ok(CenterSearch { tables, branch_jumps })
}

/// Follows the square nearest the previous one along the serpentine path and
/// returns every fiber square, tracked ones first, plus the jumps seen.
fn track_branch(bases: &[SpherePoint], per_base: &[Vec<FiberSeed>], a: f64) -> (Vec<FiberSeed>, Vec<BranchJump>) {
    let spacing = PI / (bases.len() as f64).sqrt();
    let jump_tol = 2.0 * spacing + 0.5 * a;
    let mut tracked: Vec<FiberSeed> = Vec::new();
    let mut rest: Vec<FiberSeed> = Vec::new();
    let mut jumps = Vec::new();
    let mut current: Option<(SpherePoint, FiberSeed)> = None;
    for (x, seeds) in bases.iter().zip(per_base) {
        if seeds.is_empty() {
            continue;
        }
        let pick = match &current {
            None => min_by(seeds, |s| s.center),
            Some((prev_x, prev)) => {
                let i = min_by(seeds, |s| lifted_distance(&s.lifted, &prev.lifted));
                let gap = lifted_distance(&seeds[i].lifted, &prev.lifted);
                if gap > jump_tol {
                    jumps.push(BranchJump { from: *prev_x, to: *x, gap });
                    min_by(seeds, |s| s.center)
                } else {
                    i
                }
            }
        };
        for (i, s) in seeds.iter().enumerate() {
            if i == pick {
                tracked.push(s.clone());
            } else {
                rest.push(s.clone());
            }
        }
        current = Some((*x, seeds[pick].clone()));
    }
    tracked.extend(rest);
    (tracked, jumps)
}

fn min_by<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    for (i, item) in items.iter().enumerate() {
        if key(item) < key(&items[best]) {
            best = i;
        }
    }
    best
}

/// Joint Newton for a base point and a fiber square with zero center, then
/// the table certificate.
fn solve_center<F: SphereField + ?Sized>(
    f: &F,
    a: f64,
    seed: &FiberSeed,
    cfg: &SolveConfig,
) -> Result<Option<TableSolution>> {
    let apply = |(chart, p): &(Chart, QuadParam), d: &DVector<f64>| {
        let moved = chart.moved(d[0], d[1])?;
        let t = [p.t[0] + d[3], p.t[1] + d[4], p.t[2] + d[5], p.t[3] - d[3] - d[4] - d[5]];
        t.iter().all(|&ti| ti > MIN_INCREMENT).then_some((moved, QuadParam { x: p.x + d[2], t }))
    };
    let eval = |(chart, p): &(Chart, QuadParam)| {
        let v = fiber_vertices(f, chart, a, p)?;
        let r = residual_of_vertices(&v);
        let c = CenterValue::of(&v).0;
        Some(DVector::from_row_slice(&[r[0], r[1], r[2], r[3], c[0], c[1]]))
    };
    let Some(((chart, param), _)) = local_newton((seed.chart, seed.param), 6, apply, eval, cfg.newton_tol) else {
        return Ok(None);
    };
    let Some(vertices) = fiber_vertices(f, &chart, a, &param) else {
        return Ok(None);
    };
    let center_norm = CenterValue::of(&vertices).norm();
    let angles = param.angles();
    let mut directions = [chart.x; 4];
    for (slot, theta) in directions.iter_mut().zip(angles) {
        *slot = exp_map(&TangentVector { base: chart.x, vec: scale(chart.direction(theta), a) })?;
    }
    let value_spread = spread(f, &directions);
    let square_defect = param
        .t
        .iter()
        .map(|t| (PI * (t - 0.5)).abs())
        .fold(0.0, f64::max);
    if center_norm <= CERTIFICATE_CENTER
        && (value_spread > CERTIFICATE_SPREAD || square_defect > CERTIFICATE_SQUARE)
    {
        return Err(Error::CertificateFailure { spread: value_spread, square_defect });
    }
    if !is_graceful(&vertices) {
        return Ok(None);
    }
    table_through(f, chart.x, a, &directions[0], Some(center_norm)).map(Some)
}

fn is_graceful(vertices: &[Point2; 4]) -> bool {
    crate::square::classify_graceful(vertices).unwrap_or(false)
}

/// Graceful-square count of the fiber curve at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FiberStatus {
    Generic { count: usize, parity: u8 },
    /// Some root has a nearly singular Jacobian; the count is not trusted.
    NonGeneric { sigma_min: f64 },
    /// The fiber curve carries a continuum of squares.
    Degenerate,
    /// The fiber could not be fitted or searched.
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub x: SpherePoint,
    #[serde(flatten)]
    pub status: FiberStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberParityReport {
    pub points: Vec<FiberPoint>,
    pub generic: usize,
    pub odd: usize,
    /// Points that were not counted, as a fraction of the grid.
    pub flagged_fraction: f64,
    /// Whether every generic point has an odd count.
    pub all_generic_odd: bool,
}

/// Graceful-square parity of the fiber curves of `f + c` over an
/// `n_lat × n_lon` grid, where `c` is the [`positivity_shift`].
///
/// An even count at a generic point is recomputed once on refined seed grids
/// before it is reported.
pub fn fiber_parity_sweep<F: SphereField + ?Sized>(
    f: &F,
    a: f64,
    n_lat: usize,
    n_lon: usize,
    cfg: &SolveConfig,
) -> Result<FiberParityReport> {
    check_radius(a)?;
    let shifted = Shifted { field: f, offset: positivity_shift(f) };
    let points: Vec<FiberPoint> = lat_lon_grid(n_lat, n_lon)
        .par_iter()
        .map(|x| {
            let mut status = fiber_status(&shifted, x, a, cfg);
            if matches!(status, FiberStatus::Generic { parity: 0, .. }) {
                status = fiber_status(&shifted, x, a, &cfg.refined());
            }
            FiberPoint { x: *x, status }
        })
        .collect();
    let generic = points.iter().filter(|p| matches!(p.status, FiberStatus::Generic { .. })).count();
    let odd = points.iter().filter(|p| matches!(p.status, FiberStatus::Generic { parity: 1, .. })).count();
    let flagged_fraction = if points.is_empty() { 0.0 } else { (points.len() - generic) as f64 / points.len() as f64 };
    Ok(FiberParityReport { generic, odd, flagged_fraction, all_generic_odd: generic == odd, points })
}

fn fiber_status<F: SphereField + ?Sized>(f: &F, x: &SpherePoint, a: f64, cfg: &SolveConfig) -> FiberStatus {
    let curve = match fiber_curve_at(f, x, a) {
        Ok(c) => c,
        Err(e) => return FiberStatus::Failed { reason: e.to_string() },
    };
    let report = peg::find_graceful_squares(&curve.radial, cfg).and_then(|sols| peg::parity_of(&sols, cfg));
    match report {
        Ok(report) => FiberStatus::Generic { count: report.count, parity: report.parity },
        Err(Error::GenericityFailure { sigma_min }) => FiberStatus::NonGeneric { sigma_min },
        Err(Error::DegenerateFamily { .. }) => FiberStatus::Degenerate,
        Err(e) => FiberStatus::Failed { reason: e.to_string() },
    }
}
