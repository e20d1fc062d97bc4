//! Star-shaped planar curves given by positive radial functions.
//!
//! A [`RadialFunction`] is a truncated Fourier series
//! `h(θ) = Σ aₖ cos kθ + Σ bₖ sin kθ`; the curve it describes is
//! `θ ↦ h(θ)·(cos θ, sin θ)`. Derivatives are exact trigonometric sums, which
//! is what the Newton solvers downstream rely on.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grid points used by [`RadialFunction::validate_positive`].
pub const POSITIVITY_GRID: usize = 4096;

/// Default maximum Fourier degree.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Draws attempted by [`RadialFunction::random_generic`] before giving up.
pub const RANDOM_DRAWS: usize = 10_000;

/// Positive radial function on the circle as a truncated Fourier series.
///
/// `cos_coeffs[k]` multiplies `cos kθ` (index 0 is the constant term) and
/// `sin_coeffs[k]` multiplies `sin kθ`, so `sin_coeffs[0]` never contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

/// Outcome of a positivity certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    /// Rigorous lower bound on `min h`.
    pub certified_min: f64,
    /// Smallest sampled value.
    pub grid_min: f64,
    /// Angle of the smallest sample.
    pub argmin: f64,
    /// First θ-interval whose lower bound falls below the margin.
    pub violation: Option<(f64, f64)>,
}

impl RadialFunction {
    pub fn new(cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        Self {
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c], Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.cos_coeffs
            .len()
            .max(self.sin_coeffs.len())
            .saturating_sub(1)
    }

    /// Whether every non-constant coefficient is exactly zero.
    pub fn is_circle(&self) -> bool {
        self.cos_coeffs.iter().skip(1).chain(self.sin_coeffs.iter().skip(1)).all(|&c| c == 0.0)
    }

    fn coeff(&self, k: usize) -> (f64, f64) {
        let a = self.cos_coeffs.get(k).copied().unwrap_or(0.0);
        let b = if k == 0 {
            0.0
        } else {
            self.sin_coeffs.get(k).copied().unwrap_or(0.0)
        };
        (a, b)
    }

    /// Value, first and second derivative at `theta`.
    pub fn eval_with_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let theta = theta.rem_euclid(TAU);
        let (s1, c1) = theta.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let (mut h, mut dh, mut ddh) = (0.0, 0.0, 0.0);
        for k in 0..=self.degree() {
            let (a, b) = self.coeff(k);
            let kf = k as f64;
            h += a * ck + b * sk;
            dh += kf * (b * ck - a * sk);
            ddh -= kf * kf * (a * ck + b * sk);
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        (h, dh, ddh)
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        self.eval_with_derivatives(theta).0
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.eval_with_derivatives(theta).1
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.eval_with_derivatives(theta).2
    }

    /// Upper bound on `|h'|`: `Σ k(|aₖ| + |bₖ|)`.
    pub fn lipschitz_bound(&self) -> f64 {
        (1..=self.degree())
            .map(|k| {
                let (a, b) = self.coeff(k);
                k as f64 * (a.abs() + b.abs())
            })
            .sum()
    }

    /// Certifies `min h > margin` from a 4096-point grid and the Lipschitz
    /// bound of the series.
    pub fn validate_positive(&self, margin: f64) -> PositivityReport {
        let step = TAU / POSITIVITY_GRID as f64;
        let slack = step * self.lipschitz_bound();
        let mut grid_min = f64::INFINITY;
        let mut argmin = 0.0;
        let mut violation: Option<(f64, f64)> = None;
        let mut run_start: Option<usize> = None;
        for i in 0..POSITIVITY_GRID {
            let theta = i as f64 * step;
            let v = self.evaluate(theta);
            if v < grid_min {
                grid_min = v;
                argmin = theta;
            }
            let bad = v - slack <= margin;
            match (bad, run_start) {
                (true, None) => run_start = Some(i),
                (false, Some(start)) if violation.is_none() => {
                    violation = Some(cell_interval(start, i - 1, step));
                    run_start = None;
                }
                _ => {}
            }
        }
        if let (Some(start), None) = (run_start, violation) {
            violation = Some(cell_interval(start, POSITIVITY_GRID - 1, step));
        }
        let certified_min = grid_min - slack;
        PositivityReport {
            positive: certified_min > margin,
            certified_min,
            grid_min,
            argmin,
            violation,
        }
    }

    /// Least-squares fit of degree `degree` to `f` on a uniform grid.
    ///
    /// On an equispaced grid with more than `2·degree + 1` points the normal
    /// equations are diagonal, so the fit reduces to discrete Fourier sums.
    pub fn fit<F: Fn(f64) -> f64>(f: F, degree: usize) -> Self {
        let samples = (4 * (degree + 1)).max(256);
        let values: Vec<f64> = (0..samples)
            .map(|i| f(TAU * i as f64 / samples as f64))
            .collect();
        Self::fit_samples(&values, degree)
    }

    /// Fit from values sampled at `θᵢ = 2πi/n`.
    pub fn fit_samples(values: &[f64], degree: usize) -> Self {
        let n = values.len();
        assert!(n > 2 * degree + 1, "too few samples for degree {degree}");
        let nf = n as f64;
        let mut cos_coeffs = vec![0.0; degree + 1];
        let mut sin_coeffs = vec![0.0; degree + 1];
        cos_coeffs[0] = values.iter().sum::<f64>() / nf;
        for k in 1..=degree {
            let (mut a, mut b) = (0.0, 0.0);
            for (i, v) in values.iter().enumerate() {
                // index arithmetic mod n keeps the angle exact
                let angle = TAU * ((k * i) % n) as f64 / nf;
                let (s, c) = angle.sin_cos();
                a += v * c;
                b += v * s;
            }
            cos_coeffs[k] = 2.0 * a / nf;
            sin_coeffs[k] = 2.0 * b / nf;
        }
        Self::new(cos_coeffs, sin_coeffs)
    }

    /// Maximum deviation from `f` over an `n`-point uniform grid offset by
    /// half a cell from the fit grid.
    pub fn max_deviation<F: Fn(f64) -> f64>(&self, f: F, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let theta = TAU * (i as f64 + 0.5) / n as f64;
                (self.evaluate(theta) - f(theta)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise `(1 - s)·self + s·other`.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        let n = self.degree().max(other.degree()) + 1;
        let mix = |u: &[f64], v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    (1.0 - s) * u.get(k).copied().unwrap_or(0.0)
                        + s * v.get(k).copied().unwrap_or(0.0)
                })
                .collect()
        };
        Self::new(
            mix(&self.cos_coeffs, &other.cos_coeffs),
            mix(&self.sin_coeffs, &other.sin_coeffs),
        )
    }

    /// `other - self`, as a series.
    pub fn difference(&self, other: &Self) -> Self {
        let n = self.degree().max(other.degree()) + 1;
        let sub = |u: &[f64], v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|k| v.get(k).copied().unwrap_or(0.0) - u.get(k).copied().unwrap_or(0.0))
                .collect()
        };
        Self::new(
            sub(&self.cos_coeffs, &other.cos_coeffs),
            sub(&self.sin_coeffs, &other.sin_coeffs),
        )
    }

    /// Random curve with `aₖ, bₖ ~ U[-ρ/k², ρ/k²]` around the unit circle,
    /// redrawn until the certified minimum exceeds `min_radius`.
    pub fn random_generic<R: Rng + ?Sized>(
        rng: &mut R,
        degree: usize,
        rho: f64,
        min_radius: f64,
    ) -> Result<Self> {
        for _ in 0..RANDOM_DRAWS {
            let mut cos_coeffs = vec![1.0];
            let mut sin_coeffs = vec![0.0];
            for k in 1..=degree {
                let bound = rho / (k * k) as f64;
                cos_coeffs.push(rng.random_range(-bound..=bound));
                sin_coeffs.push(rng.random_range(-bound..=bound));
            }
            let h = Self::new(cos_coeffs, sin_coeffs);
            if h.validate_positive(min_radius).positive {
                return Ok(h);
            }
        }
        Err(Error::InvalidParam(format!(
            "no curve with rho = {rho} cleared min radius {min_radius} in {RANDOM_DRAWS} draws"
        )))
    }
}

fn cell_interval(first: usize, last: usize, step: f64) -> (f64, f64) {
    ((first as f64 - 1.0).max(0.0) * step, (last as f64 + 1.0) * step)
}

/// Star-shaped curve `θ ↦ h(θ)·(cos θ, sin θ)` with a certified positive
/// radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCurve {
    radial: RadialFunction,
    certified_min: f64,
}

impl StarCurve {
    pub fn new(radial: RadialFunction) -> Result<Self> {
        let report = radial.validate_positive(0.0);
        if !report.positive {
            let (from, to) = report.violation.unwrap_or((0.0, TAU));
            return Err(Error::NotPositive {
                certified_min: report.certified_min,
                from,
                to,
            });
        }
        Ok(Self {
            radial,
            certified_min: report.certified_min,
        })
    }

    pub fn radial(&self) -> &RadialFunction {
        &self.radial
    }

    pub fn certified_min(&self) -> f64 {
        self.certified_min
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        curve_point(&self.radial, theta)
    }
}

/// `h(θ)·(cos θ, sin θ)`.
pub fn curve_point(h: &RadialFunction, theta: f64) -> [f64; 2] {
    let theta = theta.rem_euclid(TAU);
    let r = h.evaluate(theta);
    let (s, c) = theta.sin_cos();
    [r * c, r * s]
}

/// Point and its θ-derivative on the curve.
pub(crate) fn curve_point_and_tangent(h: &RadialFunction, theta: f64) -> ([f64; 2], [f64; 2]) {
    let theta = theta.rem_euclid(TAU);
    let (r, dr, _) = h.eval_with_derivatives(theta);
    let (s, c) = theta.sin_cos();
    ([r * c, r * s], [dr * c - r * s, dr * s + r * c])
}
