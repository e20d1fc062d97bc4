//! Tracking the ellipse's graceful square along `h_s = (1 - s)·g + s·h`.
//!
//! The tracker follows the solution curve of `F(h_s; x, t) = 0` in the
//! five unknowns `(x, t₀, t₁, t₂, s)` by pseudo-arclength continuation, so it
//! passes through folds where `s` turns back instead of stalling at them.
//! A fold shows up as a sign change of the `s` component of the unit tangent
//! and is pinned down by bisection along the arc.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix5, SMatrix, Vector4, Vector5};
use serde::{Deserialize, Serialize};

use super::{newton_square, SolveConfig, MIN_INCREMENT};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::radial::{RadialFunction, StarCurve};
use crate::square::{residual_jacobian, sigma_min, square_residual, to_vector, QuadParam, SquareSolution};

/// Largest move between consecutive tracked points that the corrector is
/// trusted to stay on the same branch.
pub const BASIN_BOUND: f64 = 0.25;

const CORRECTOR_MAX_ITER: usize = 8;
const FOLD_BISECTIONS: usize = 60;
const MIN_STEP: f64 = 1e-9;

/// Which way `s` runs after a fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldDirection {
    /// The branch turns back towards smaller `s`.
    Backward,
    /// The branch resumes towards larger `s`.
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldEvent {
    pub s: f64,
    pub direction: FoldDirection,
    pub param: QuadParam,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub s: f64,
    pub param: QuadParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrace {
    pub samples: Vec<TraceSample>,
    pub folds: Vec<FoldEvent>,
    /// Graceful square of the target curve reached at `s = 1`.
    pub endpoint: SquareSolution,
}

type Point5 = Vector5<f64>;

struct Homotopy {
    start: RadialFunction,
    target: RadialFunction,
}

impl Homotopy {
    fn curve(&self, s: f64) -> RadialFunction {
        self.start.lerp(&self.target, s)
    }

    fn residual(&self, y: &Point5) -> Vector4<f64> {
        to_vector(square_residual(&self.curve(y[4]), &param_of(y)))
    }

    /// `∂F/∂(x, t₀, t₁, t₂, s)`. The residual is quadratic in `s`, so the
    /// central difference in `s` is exact up to rounding.
    fn jacobian(&self, y: &Point5) -> SMatrix<f64, 4, 5> {
        let p = param_of(y);
        let h = self.curve(y[4]);
        let mut jac = SMatrix::<f64, 4, 5>::zeros();
        jac.fixed_view_mut::<4, 4>(0, 0).copy_from(&residual_jacobian(&h, &p));
        let ds = 1e-3;
        let plus = to_vector(square_residual(&self.curve(y[4] + ds), &p));
        let minus = to_vector(square_residual(&self.curve(y[4] - ds), &p));
        jac.set_column(4, &((plus - minus) / (2.0 * ds)));
        jac
    }

    /// Unit tangent of the solution curve, oriented to agree with `prev`.
    fn tangent(&self, y: &Point5, prev: &Point5) -> Option<Point5> {
        let mut m = Matrix5::zeros();
        m.fixed_view_mut::<4, 5>(0, 0).copy_from(&self.jacobian(y));
        m.set_row(4, &prev.transpose());
        let rhs = Point5::new(0.0, 0.0, 0.0, 0.0, 1.0);
        let tau = m.lu().solve(&rhs)?;
        let tau = tau.normalize();
        Some(if tau.dot(prev) < 0.0 { -tau } else { tau })
    }

    /// Newton on `F = 0` plus the arclength plane through `anchor` with
    /// normal `tau`.
    fn correct(&self, guess: Point5, anchor: &Point5, tau: &Point5, tol: f64) -> Option<(Point5, usize)> {
        let mut y = guess;
        for iter in 0..CORRECTOR_MAX_ITER {
            let f = self.residual(&y);
            let plane = tau.dot(&(y - anchor));
            if f.norm() <= tol && plane.abs() <= tol {
                return admissible(&y).then_some((y, iter));
            }
            let mut m = Matrix5::zeros();
            m.fixed_view_mut::<4, 5>(0, 0).copy_from(&self.jacobian(&y));
            m.set_row(4, &tau.transpose());
            let rhs = Point5::new(-f[0], -f[1], -f[2], -f[3], -plane);
            y += m.lu().solve(&rhs)?;
            if !admissible(&y) {
                return None;
            }
        }
        let converged = self.residual(&y).norm() <= tol;
        (converged && admissible(&y)).then_some((y, CORRECTOR_MAX_ITER))
    }
}

fn param_of(y: &Point5) -> QuadParam {
    QuadParam {
        x: y[0],
        t: [y[1], y[2], y[3], 2.0 - y[1] - y[2] - y[3]],
    }
}

fn point_of(p: &QuadParam, s: f64) -> Point5 {
    Point5::new(p.x, p.t[0], p.t[1], p.t[2], s)
}

fn admissible(y: &Point5) -> bool {
    y.iter().all(|v| v.is_finite()) && param_of(y).t.iter().all(|&t| t > MIN_INCREMENT)
}

/// Tracks the unique graceful square of the ellipse fixture to a graceful
/// square of `target`.
///
/// `steps` sets the nominal resolution: the initial arclength step is
/// `1 / steps` and the step size adapts between `MIN_STEP` and `4 / steps`.
pub fn continue_from_ellipse(target: &RadialFunction, cfg: &SolveConfig, steps: usize) -> Result<ContinuationTrace> {
    StarCurve::new(target.clone())?;
    let steps = steps.max(1);
    let homotopy = Homotopy {
        start: fixtures::ellipse_radial(),
        target: target.clone(),
    };

    let start = newton_square(&homotopy.start, &QuadParam::regular(FRAC_PI_4), cfg);
    if !start.converged {
        return Err(Error::TrackingLoss { s: 0.0 });
    }
    let mut y = point_of(&start.root, 0.0);
    let mut tau = homotopy
        .tangent(&y, &Point5::new(0.0, 0.0, 0.0, 0.0, 1.0))
        .ok_or(Error::TrackingLoss { s: 0.0 })?;

    let max_step = 4.0 / steps as f64;
    let mut h = 1.0 / steps as f64;
    let mut samples = vec![TraceSample { s: 0.0, param: start.root }];
    let mut folds = Vec::new();
    let budget = 200 * steps;

    for _ in 0..budget {
        // land exactly on s = 1 once the predictor would cross it
        if tau[4] > 0.0 && y[4] + h * tau[4] >= 1.0 {
            if let Some((landed, endpoint)) = finish(&homotopy, &y, &tau, cfg) {
                samples.push(TraceSample { s: 1.0, param: landed });
                return Ok(ContinuationTrace { samples, folds, endpoint });
            }
        }

        let predicted = y + tau * h;
        let corrected = homotopy
            .correct(predicted, &predicted, &tau, cfg.newton_tol)
            .filter(|(next, _)| (next - y).norm() < BASIN_BOUND.min(2.0 * h));
        let Some((next, iters)) = corrected else {
            h *= 0.5;
            if h < MIN_STEP {
                return Err(Error::TrackingLoss { s: y[4] });
            }
            continue;
        };
        let Some(next_tau) = homotopy.tangent(&next, &tau) else {
            return Err(Error::TrackingLoss { s: next[4] });
        };

        if tau[4].signum() != next_tau[4].signum() {
            folds.push(locate_fold(&homotopy, &y, &tau, h, next_tau[4], cfg));
        }

        let positivity = homotopy.curve(next[4]).validate_positive(0.0);
        if !positivity.positive {
            return Err(Error::PositivityLost { s: next[4] });
        }

        y = next;
        tau = next_tau;
        samples.push(TraceSample { s: y[4], param: param_of(&y) });
        if iters <= 3 {
            h = (h * 1.5).min(max_step);
        }
    }
    Err(Error::TrackingLoss { s: y[4] })
}

/// Corrects from the last tracked point onto the slice `s = 1`, returning the
/// root in the tracked labelling and as a canonical solution.
fn finish(
    homotopy: &Homotopy,
    y: &Point5,
    tau: &Point5,
    cfg: &SolveConfig,
) -> Option<(QuadParam, SquareSolution)> {
    let reach = (1.0 - y[4]) / tau[4];
    let guess = param_of(&(y + tau * reach));
    let report = newton_square(&homotopy.target, &guess, cfg);
    let landed = report.root;
    let moved = point_of(&landed, 1.0) - y;
    if !report.converged || moved.norm() > BASIN_BOUND.max(2.0 * reach) {
        return None;
    }
    let reduced = QuadParam {
        x: landed.x.rem_euclid(std::f64::consts::TAU),
        t: landed.t,
    };
    Some((landed, SquareSolution::from_root(&homotopy.target, &reduced)))
}

/// Bisects the arc between `y` and the next accepted point for the place
/// where the tangent's `s` component vanishes.
fn locate_fold(homotopy: &Homotopy, y: &Point5, tau: &Point5, h: f64, after: f64, cfg: &SolveConfig) -> FoldEvent {
    let (mut lo, mut hi) = (0.0, h);
    let mut best = *y;
    for _ in 0..FOLD_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let predicted = y + tau * mid;
        let Some((point, _)) = homotopy.correct(predicted, &predicted, tau, cfg.newton_tol) else {
            break;
        };
        let Some(t_mid) = homotopy.tangent(&point, tau) else {
            break;
        };
        best = point;
        if t_mid[4].signum() == tau[4].signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let param = param_of(&best);
    FoldEvent {
        s: best[4],
        direction: if after < 0.0 { FoldDirection::Backward } else { FoldDirection::Forward },
        param,
        sigma_min: sigma_min(&residual_jacobian(&homotopy.curve(best[4]), &param)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peg::find_graceful_squares;

    #[test]
    fn ellipse_target_is_a_trivial_trace() {
        let g = fixtures::ellipse_radial();
        let trace = continue_from_ellipse(&g, &SolveConfig::default(), 10).unwrap();
        assert!(trace.folds.is_empty());
        let start = trace.samples[0].param;
        for sample in &trace.samples {
            assert!(sample.param.distance(&start) < 1e-9);
        }
        assert!(trace.endpoint.param.orbit_distance(&start) < 1e-9);
    }

    #[test]
    fn endpoint_is_a_found_square() {
        let cfg = SolveConfig::default();
        for seed in 0..3 {
            let h = fixtures::random_curve(seed);
            let trace = continue_from_ellipse(&h, &cfg, 20).unwrap();
            let found = find_graceful_squares(&h, &cfg).unwrap();
            let best = found
                .iter()
                .map(|s| s.param.orbit_distance(&trace.endpoint.param))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "seed {seed}: endpoint {:.3e} from nearest", best);
            for pair in trace.samples.windows(2) {
                assert!(pair[1].param.distance(&pair[0].param) < BASIN_BOUND);
            }
        }
    }

    #[test]
    fn rejects_non_positive_target() {
        let h = RadialFunction::new(vec![0.5, 1.0], vec![]);
        assert!(matches!(
            continue_from_ellipse(&h, &SolveConfig::default(), 10),
            Err(Error::NotPositive { .. })
        ));
    }
}
