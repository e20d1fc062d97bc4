//! Reference curves and fields shared by the examples, the CLI and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harmonics::{HarmonicTerm, ScalarField};
use crate::radial::RadialFunction;

/// Fourier degree of the ellipse fixture.
pub const ELLIPSE_DEGREE: usize = 40;

/// Half-width of the unique inscribed square of the ellipse `v₁² + 2v₂² = 1`:
/// `AB/√(A² + B²)` with `A = 1`, `B = 1/√2`.
pub const ELLIPSE_SQUARE_HALF_WIDTH: f64 = 0.577_350_269_189_625_8;

/// Radial function of the ellipse `v₁² + 2v₂² = 1`, evaluated in closed form.
pub fn ellipse_radial_exact(theta: f64) -> f64 {
    let s = theta.sin();
    1.0 / (1.0 + s * s).sqrt()
}

/// Least-squares Fourier fit of [`ellipse_radial_exact`].
pub fn ellipse_radial() -> RadialFunction {
    RadialFunction::fit(ellipse_radial_exact, ELLIPSE_DEGREE)
}

/// Seeded random curve used by the parity experiments: degree 5,
/// `ρ = 0.3`, certified `min h > 0.2`.
pub fn random_curve(seed: u64) -> RadialFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RadialFunction::random_generic(&mut rng, 5, 0.3, 0.2).expect("fixture parameters admit curves")
}

/// Seeded random field with every `(ℓ, m)` for `1 ≤ ℓ ≤ max_degree`
/// (even `ℓ` only when `even`) and coefficients uniform in `[-1, 1]/ℓ`.
pub fn random_field(seed: u64, max_degree: u32, even: bool) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for l in 1..=max_degree {
        if even && l % 2 == 1 {
            continue;
        }
        for m in -(l as i32)..=(l as i32) {
            let c: f64 = rng.random_range(-1.0..=1.0) / l as f64;
            terms.push(HarmonicTerm::new(l, m, c));
        }
    }
    ScalarField::new(terms, even).expect("fixture terms are valid")
}

/// Even fixtures used for the table experiments.
pub fn even_fields() -> Vec<ScalarField> {
    [101, 202, 303].iter().map(|&s| random_field(s, 4, true)).collect()
}

/// Mixed even and non-even fixtures used for the great-circle experiments.
pub fn great_circle_fields() -> Vec<ScalarField> {
    vec![
        random_field(101, 4, true),
        random_field(202, 4, true),
        random_field(11, 3, false),
        random_field(12, 4, false),
        random_field(13, 5, false),
    ]
}
