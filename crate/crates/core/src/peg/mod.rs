//! Graceful squares of star-shaped curves by multi-start Newton.
//!
//! Seeds cover `S¹ × {Σt = 2}` on a product grid. Every converged root is
//! reduced to its Z₄-canonical form and merged with roots closer than
//! `dedupe_tol` in orbit distance, so the output does not depend on which
//! relabeling a seed happened to converge to.

mod continuation;

pub use continuation::{
    continue_from_ellipse, ContinuationTrace, FoldDirection, FoldEvent, TraceSample, BASIN_BOUND,
};

use std::f64::consts::TAU;

use nalgebra::Vector4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Representative, Result};
use crate::radial::{RadialFunction, StarCurve};
use crate::square::{
    residual_jacobian, sigma_min, square_residual, to_vector, QuadParam, SquareSolution,
};

/// Roots whose increments fall below this are treated as degenerate.
pub(crate) const MIN_INCREMENT: f64 = 1e-6;

/// Roots at least this far apart count as distinct members of a family.
const FAMILY_SEPARATION: f64 = 1e-3;

/// Offset along the Jacobian null direction used to probe for a continuum.
const FAMILY_PROBE: f64 = 1e-2;

/// Residual, relative to the squared side, that probe roots must reach to
/// count as members of an exact continuum rather than a near-degenerate one.
const FAMILY_RESIDUAL: f64 = 1e-13;

/// Solver settings shared by the square and table searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Seeds along each angular dimension.
    pub grid_density: usize,
    /// Subdivisions of the increment simplex.
    pub simplex_density: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dedupe_tol: f64,
    pub genericity_floor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grid_density: 16,
            simplex_density: 8,
            newton_tol: 1e-12,
            newton_max_iter: 60,
            dedupe_tol: 1e-5,
            genericity_floor: 1e-8,
        }
    }
}

impl SolveConfig {
    /// Same settings with both seed grids doubled.
    pub fn refined(&self) -> Self {
        Self {
            grid_density: self.grid_density * 2,
            simplex_density: self.simplex_density * 2,
            ..self.clone()
        }
    }
}

/// Iterates and residual norms of one Newton run.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub root: QuadParam,
    pub converged: bool,
    pub iterates: Vec<QuadParam>,
    pub residual_norms: Vec<f64>,
}

/// Newton steps longer than this are not accepted as converged even when the
/// residual is below tolerance; near-singular pseudo-roots fail this test.
const STEP_TOL: f64 = 1e-7;

/// Damped Newton on the square system, keeping the increments positive.
///
/// The linear step is a truncated-SVD least-squares solve so that a singular
/// Jacobian (a continuum of roots, as for the circle) still yields a
/// minimum-norm step onto the root set. Convergence needs both a residual
/// below `newton_tol` and a Newton step below `STEP_TOL`.
pub fn newton_square(h: &RadialFunction, start: &QuadParam, cfg: &SolveConfig) -> NewtonReport {
    let mut p = *start;
    let mut r = to_vector(square_residual(h, &p));
    let mut norm = r.norm();
    let mut iterates = vec![p];
    let mut residual_norms = vec![norm];
    let mut converged = false;

    for _ in 0..=cfg.newton_max_iter {
        let jac = residual_jacobian(h, &p);
        let svd = jac.svd(true, true);
        let cutoff = 1e-13 * svd.singular_values.max();
        let Ok(step) = svd.solve(&(-r), cutoff) else {
            break;
        };
        if norm <= cfg.newton_tol && step.norm() <= STEP_TOL {
            converged = true;
            break;
        }
        let Some((next, next_r)) = damped_step(h, &p, &step, norm) else {
            break;
        };
        p = next;
        r = next_r;
        norm = r.norm();
        iterates.push(p);
        residual_norms.push(norm);
    }
    NewtonReport {
        root: p,
        converged,
        iterates,
        residual_norms,
    }
}

fn damped_step(
    h: &RadialFunction,
    p: &QuadParam,
    step: &Vector4<f64>,
    norm: f64,
) -> Option<(QuadParam, Vector4<f64>)> {
    // fraction-to-boundary rule on t0, t1, t2 and t3 = 2 - t0 - t1 - t2
    let dt = [step[1], step[2], step[3], -(step[1] + step[2] + step[3])];
    let mut lambda: f64 = 1.0;
    for (ti, di) in p.t.iter().zip(dt) {
        if di < 0.0 {
            lambda = lambda.min(0.9 * ti / -di);
        }
    }
    for _ in 0..30 {
        let cand = QuadParam {
            x: p.x + lambda * step[0],
            t: [
                p.t[0] + lambda * dt[0],
                p.t[1] + lambda * dt[1],
                p.t[2] + lambda * dt[2],
                p.t[3] + lambda * dt[3],
            ],
        };
        let r = to_vector(square_residual(h, &cand));
        if r.norm() < norm || (r.norm() == 0.0 && norm == 0.0) {
            return Some((cand, r));
        }
        lambda *= 0.5;
    }
    None
}

/// Deterministic seed grid over `S¹ × {Σt = 2}`.
pub fn seed_grid(cfg: &SolveConfig) -> Vec<QuadParam> {
    let m = cfg.simplex_density.max(4);
    let mut simplex = Vec::new();
    for a in 1..m {
        for b in 1..m - a {
            for c in 1..m - a - b {
                let d = m - a - b - c;
                let scale = 2.0 / m as f64;
                simplex.push([a as f64 * scale, b as f64 * scale, c as f64 * scale, d as f64 * scale]);
            }
        }
    }
    if !simplex.iter().any(|t| t.iter().all(|&ti| (ti - 0.5).abs() < 1e-12)) {
        simplex.push([0.5; 4]);
    }
    let n = cfg.grid_density.max(1);
    (0..n)
        .flat_map(|k| {
            let x = TAU * k as f64 / n as f64;
            simplex.iter().map(move |&t| QuadParam { x, t })
        })
        .collect()
}

fn accept_root(report: &NewtonReport) -> Option<QuadParam> {
    let p = report.root;
    if !report.converged || p.t.iter().any(|&ti| ti < MIN_INCREMENT) {
        return None;
    }
    Some(QuadParam {
        x: p.x.rem_euclid(TAU),
        t: p.t,
    })
}

/// Merges roots that are closer than `tol` in orbit distance, keeping the
/// first occurrence.
pub fn dedupe_roots(roots: impl IntoIterator<Item = QuadParam>, tol: f64) -> Vec<QuadParam> {
    let mut kept: Vec<QuadParam> = Vec::new();
    for p in roots {
        if kept.iter().all(|q| q.orbit_distance(&p) >= tol) {
            kept.push(p);
        }
    }
    kept
}

/// All graceful squares reachable from the seed grid, Z₄-deduplicated and
/// sorted by canonical parameter.
pub fn find_graceful_squares(h: &RadialFunction, cfg: &SolveConfig) -> Result<Vec<SquareSolution>> {
    StarCurve::new(h.clone())?;
    let seeds = seed_grid(cfg);
    let roots: Vec<Option<QuadParam>> = seeds
        .par_iter()
        .map(|s| accept_root(&newton_square(h, s, cfg)))
        .collect();
    let roots = dedupe_roots(roots.into_iter().flatten(), cfg.dedupe_tol);
    let mut solutions: Vec<SquareSolution> =
        roots.iter().map(|p| SquareSolution::from_root(h, p)).collect();
    solutions.sort_by(|a, b| canonical_order(&a.param, &b.param));

    if solutions.is_empty() {
        return Err(Error::SolverCoverageFailure);
    }
    let singular: Vec<&SquareSolution> = solutions
        .iter()
        .filter(|s| s.jacobian_sigma_min < cfg.genericity_floor)
        .collect();
    if let Some(rep) = singular.iter().find(|s| lies_on_continuum(h, s, cfg)) {
        let distant = dedupe_roots(singular.iter().map(|s| s.param), FAMILY_SEPARATION);
        return Err(Error::DegenerateFamily {
            roots: distant.len(),
            representative: Box::new(Representative::Square(rep.param)),
        });
    }
    Ok(solutions)
}

/// Whether Newton started a small step off `p` along the Jacobian's null
/// direction lands on another nearby root, i.e. the roots form a curve
/// through `p` rather than an isolated point.
fn lies_on_continuum(h: &RadialFunction, sol: &SquareSolution, cfg: &SolveConfig) -> bool {
    let p = &sol.param;
    let exact = FAMILY_RESIDUAL * sol.side * sol.side;
    if sol.residual_norm > exact {
        return false;
    }
    let svd = residual_jacobian(h, p).svd(false, true);
    let Some(v_t) = svd.v_t else {
        return false;
    };
    let (imin, _) = svd.singular_values.argmin();
    let null = v_t.row(imin).transpose();
    [FAMILY_PROBE, -FAMILY_PROBE].iter().all(|&delta| {
        let probe = QuadParam {
            x: p.x + delta * null[0],
            t: [
                p.t[0] + delta * null[1],
                p.t[1] + delta * null[2],
                p.t[2] + delta * null[3],
                p.t[3] - delta * (null[1] + null[2] + null[3]),
            ],
        };
        let report = newton_square(h, &probe, cfg);
        let moved = report.root.distance(p);
        let residual = report.residual_norms.last().copied().unwrap_or(f64::INFINITY);
        report.converged
            && residual <= exact
            && moved > 0.5 * FAMILY_PROBE
            && moved < 2.0 * FAMILY_PROBE
    })
}

fn canonical_order(a: &QuadParam, b: &QuadParam) -> std::cmp::Ordering {
    a.t.iter()
        .chain(std::iter::once(&a.x))
        .zip(b.t.iter().chain(std::iter::once(&b.x)))
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Count of graceful squares and its residue mod 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityReport {
    pub count: usize,
    pub parity: u8,
}

/// Mod-2 count of graceful squares; refuses curves with a near-degenerate
/// root, where the count is not stable.
///
/// A root continuum is passed through as `DegenerateFamily` only for a circle.
/// On any other curve a continuum visible in floating point is a near-degenerate
/// configuration and is reported as `GenericityFailure`.
pub fn parity(h: &RadialFunction, cfg: &SolveConfig) -> Result<ParityReport> {
    parity_with_squares(h, cfg).map(|(report, _)| report)
}

/// [`parity`] together with the squares it counted.
pub fn parity_with_squares(h: &RadialFunction, cfg: &SolveConfig) -> Result<(ParityReport, Vec<SquareSolution>)> {
    let solutions = match find_graceful_squares(h, cfg) {
        Err(Error::DegenerateFamily { representative, .. }) if !h.is_circle() => {
            let sigma_min = match *representative {
                Representative::Square(p) => sigma_min(&residual_jacobian(h, &p)),
                Representative::Table(_) => 0.0,
            };
            return Err(Error::GenericityFailure { sigma_min });
        }
        other => other?,
    };
    Ok((parity_of(&solutions, cfg)?, solutions))
}

pub(crate) fn parity_of(solutions: &[SquareSolution], cfg: &SolveConfig) -> Result<ParityReport> {
    let worst = solutions
        .iter()
        .map(|s| s.jacobian_sigma_min)
        .fold(f64::INFINITY, f64::min);
    if worst < cfg.genericity_floor {
        return Err(Error::GenericityFailure { sigma_min: worst });
    }
    Ok(ParityReport {
        count: solutions.len(),
        parity: (solutions.len() % 2) as u8,
    })
}
