//! Scalar fields on the unit sphere as finite sums of real, orthonormal
//! spherical harmonics.
//!
//! Convention: for `m > 0`, `Y_ℓm = √2 N_ℓm P_ℓ^m(cos θ) cos mφ`, for `m < 0`
//! the same with `sin |m|φ`, and `Y_ℓ0 = N_ℓ0 P_ℓ(cos θ)`, where
//! `N_ℓm = √((2ℓ+1)/(4π) · (ℓ-m)!/(ℓ+m)!)` and `P_ℓ^m` carries no
//! Condon–Shortley phase. The functions are orthonormal in `L²(S²)`.
//!
//! Evaluation works directly in Cartesian coordinates: `P_ℓ^m(z)` is written
//! as `sin^m θ · Q_ℓ^m(z)` and `sin^m θ · e^{imφ} = (x + iy)^m`, so nothing
//! is singular at the poles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Default degree cap for fields read from configuration.
pub const DEFAULT_MAX_DEGREE: u32 = 8;

/// Anything that can be evaluated on the unit sphere.
pub trait SphereField: Sync {
    fn value(&self, p: &SpherePoint) -> f64;

    /// Whether `f(-p) = f(p)` holds by construction.
    fn is_even(&self) -> bool;

    /// Whether the field is constant by construction.
    fn is_constant(&self) -> bool {
        false
    }
}

/// One `(ℓ, m, coefficient)` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i32,
    pub coeff: f64,
}

impl HarmonicTerm {
    pub fn new(l: u32, m: i32, coeff: f64) -> Self {
        Self { l, m, coeff }
    }
}

/// Finite combination of real spherical harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    terms: Vec<HarmonicTerm>,
    even_only: bool,
    max_degree: u32,
    /// Dense coefficients, `dense[l][l + m]`.
    dense: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn new(terms: Vec<HarmonicTerm>, even_only: bool) -> Result<Self> {
        Self::with_degree_cap(terms, even_only, DEFAULT_MAX_DEGREE)
    }

    pub fn with_degree_cap(terms: Vec<HarmonicTerm>, even_only: bool, cap: u32) -> Result<Self> {
        for t in &terms {
            if t.m.unsigned_abs() > t.l {
                return Err(Error::InvalidHarmonic(format!("|m| > l in ({}, {})", t.l, t.m)));
            }
            if t.l > cap {
                return Err(Error::InvalidHarmonic(format!("degree {} above cap {cap}", t.l)));
            }
            if even_only && t.l % 2 == 1 {
                return Err(Error::InvalidHarmonic(format!(
                    "odd degree {} in an even field",
                    t.l
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidHarmonic("non-finite coefficient".into()));
            }
        }
        let max_degree = terms.iter().map(|t| t.l).max().unwrap_or(0);
        let mut dense: Vec<Vec<f64>> = (0..=max_degree)
            .map(|l| vec![0.0; 2 * l as usize + 1])
            .collect();
        for t in &terms {
            dense[t.l as usize][(t.l as i32 + t.m) as usize] += t.coeff;
        }
        Ok(Self {
            terms,
            even_only,
            max_degree,
            dense,
        })
    }

    /// Constant field `c`.
    pub fn constant(c: f64) -> Self {
        Self::new(vec![HarmonicTerm::new(0, 0, c * 2.0 * PI.sqrt())], true)
            .expect("constant term is valid")
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn even_only(&self) -> bool {
        self.even_only
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Whether every term with `ℓ` odd vanishes.
    pub fn has_only_even_terms(&self) -> bool {
        self.terms.iter().all(|t| t.l % 2 == 0 || t.coeff == 0.0)
    }

    pub fn eval(&self, p: &SpherePoint) -> f64 {
        let [x, y, z] = p.xyz();
        let lmax = self.max_degree as usize;
        let mut total = 0.0;
        // (x + iy)^m
        let (mut re, mut im) = (1.0, 0.0);
        // Q_m^m = (2m-1)!!
        let mut q_mm = 1.0;
        for m in 0..=lmax {
            if m > 0 {
                let next_re = re * x - im * y;
                im = re * y + im * x;
                re = next_re;
                q_mm *= (2 * m - 1) as f64;
            }
            let (mut q_prev, mut q_cur) = (0.0, q_mm);
            for l in m..=lmax {
                if l > m {
                    let q_next = if l == m + 1 {
                        z * (2 * m + 1) as f64 * q_cur
                    } else {
                        ((2 * l - 1) as f64 * z * q_cur - (l + m - 1) as f64 * q_prev)
                            / (l - m) as f64
                    };
                    q_prev = q_cur;
                    q_cur = q_next;
                }
                let row = &self.dense[l];
                let norm = normalization(l, m);
                if m == 0 {
                    total += row[l] * norm * q_cur;
                } else {
                    let scaled = std::f64::consts::SQRT_2 * norm * q_cur;
                    total += row[l + m] * scaled * re + row[l - m] * scaled * im;
                }
            }
        }
        total
    }
}

fn normalization(l: usize, m: usize) -> f64 {
    // (l-m)!/(l+m)! as a product to avoid overflow
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

impl SphereField for ScalarField {
    fn value(&self, p: &SpherePoint) -> f64 {
        self.eval(p)
    }

    fn is_even(&self) -> bool {
        self.even_only
    }

    fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.l == 0 || t.coeff == 0.0)
    }
}

/// Field given by a closure, for fixtures that are not finite harmonic sums.
pub struct FnField<F> {
    f: F,
    even: bool,
}

impl<F: Fn(&SpherePoint) -> f64 + Sync> FnField<F> {
    /// `even` asserts `f(-p) = f(p)`; it is not checked.
    pub fn new(f: F, even: bool) -> Self {
        Self { f, even }
    }
}

impl<F: Fn(&SpherePoint) -> f64 + Sync> SphereField for FnField<F> {
    fn value(&self, p: &SpherePoint) -> f64 {
        (self.f)(p)
    }

    fn is_even(&self) -> bool {
        self.even
    }
}

/// `f + c`.
pub struct Shifted<'a, F: ?Sized> {
    pub field: &'a F,
    pub offset: f64,
}

impl<F: SphereField + ?Sized> SphereField for Shifted<'_, F> {
    fn value(&self, p: &SpherePoint) -> f64 {
        self.field.value(p) + self.offset
    }

    fn is_even(&self) -> bool {
        self.field.is_even()
    }

    fn is_constant(&self) -> bool {
        self.field.is_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sphere::fibonacci_sphere;

    #[test]
    fn constant_harmonic() {
        let f = ScalarField::new(vec![HarmonicTerm::new(0, 0, 1.0)], true).unwrap();
        for p in fibonacci_sphere(20) {
            assert!((f.eval(&p) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        }
        let c = ScalarField::constant(3.5);
        assert!((c.eval(&SpherePoint::NORTH) - 3.5).abs() < 1e-14);
    }

    #[test]
    fn z_squared_combination() {
        // z² = (2√π/3) Y₀₀ + (4/3)√(π/5) Y₂₀
        let f = ScalarField::new(
            vec![
                HarmonicTerm::new(0, 0, 2.0 * PI.sqrt() / 3.0),
                HarmonicTerm::new(2, 0, 4.0 / 3.0 * (PI / 5.0).sqrt()),
            ],
            true,
        )
        .unwrap();
        assert!((f.eval(&SpherePoint::NORTH) - 1.0).abs() < 1e-14);
        for p in fibonacci_sphere(50) {
            let z = p.xyz()[2];
            assert!((f.eval(&p) - z * z).abs() < 1e-14);
        }
    }

    #[test]
    fn low_degree_polynomials() {
        // Y₁₁ = √(3/4π) x, Y₁₋₁ = √(3/4π) y, Y₂₂ = ¼√(15/π)(x² - y²), Y₂₋₂ = ½√(15/π) xy
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        let c22 = 0.25 * (15.0 / PI).sqrt();
        let c2m2 = 0.5 * (15.0 / PI).sqrt();
        let cases: Vec<(HarmonicTerm, Box<dyn Fn([f64; 3]) -> f64>)> = vec![
            (HarmonicTerm::new(1, 1, 1.0), Box::new(move |p| c1 * p[0])),
            (HarmonicTerm::new(1, -1, 1.0), Box::new(move |p| c1 * p[1])),
            (HarmonicTerm::new(1, 0, 1.0), Box::new(move |p| c1 * p[2])),
            (HarmonicTerm::new(2, 2, 1.0), Box::new(move |p| c22 * (p[0] * p[0] - p[1] * p[1]))),
            (HarmonicTerm::new(2, -2, 1.0), Box::new(move |p| c2m2 * p[0] * p[1])),
        ];
        for (term, poly) in cases {
            let f = ScalarField::new(vec![term], false).unwrap();
            for p in fibonacci_sphere(40) {
                assert!((f.eval(&p) - poly(p.xyz())).abs() < 1e-14, "{term:?}");
            }
        }
    }

    #[test]
    fn orthonormal_by_quadrature() {
        // Gauss-free check: lat-lon midpoint rule on a fine grid.
        let (n_t, n_p) = (200, 400);
        let lmax = 4u32;
        let mut basis = Vec::new();
        for l in 0..=lmax {
            for m in -(l as i32)..=(l as i32) {
                basis.push(ScalarField::new(vec![HarmonicTerm::new(l, m, 1.0)], false).unwrap());
            }
        }
        let mut gram = vec![vec![0.0; basis.len()]; basis.len()];
        for i in 0..n_t {
            let theta = PI * (i as f64 + 0.5) / n_t as f64;
            let w = theta.sin() * (PI / n_t as f64) * (2.0 * PI / n_p as f64);
            for j in 0..n_p {
                let phi = 2.0 * PI * j as f64 / n_p as f64;
                let p = SpherePoint::new([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
                let vals: Vec<f64> = basis.iter().map(|b| b.eval(&p)).collect();
                for a in 0..vals.len() {
                    for b in 0..vals.len() {
                        gram[a][b] += w * vals[a] * vals[b];
                    }
                }
            }
        }
        for a in 0..basis.len() {
            for b in 0..basis.len() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a][b] - want).abs() < 1e-4, "gram[{a}][{b}] = {}", gram[a][b]);
            }
        }
    }

    #[test]
    fn even_fields_are_antipodally_symmetric() {
        let f = fixtures::random_field(42, 8, true);
        for p in fibonacci_sphere(1000) {
            assert!((f.eval(&p) - f.eval(&p.antipode())).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(ScalarField::new(vec![HarmonicTerm::new(1, 2, 1.0)], false).is_err());
        assert!(ScalarField::new(vec![HarmonicTerm::new(3, 0, 1.0)], true).is_err());
        assert!(ScalarField::new(vec![HarmonicTerm::new(9, 0, 1.0)], false).is_err());
    }
}
