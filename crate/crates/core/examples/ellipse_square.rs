//! The ellipse `v₁² + 2v₂² = 1` has exactly one graceful inscribed square,
//! with vertices at `(±1/√3, ±1/√3)`.
//!
//! ```bash
//! cargo run --example ellipse_square
//! ```

use squarepeg::fixtures::{ellipse_radial, ELLIPSE_SQUARE_HALF_WIDTH};
use squarepeg::peg::{find_graceful_squares, SolveConfig};
use squarepeg::square::classify_graceful;

fn main() -> squarepeg::Result<()> {
    let h = ellipse_radial();
    let squares = find_graceful_squares(&h, &SolveConfig::default())?;
    println!("{} graceful square(s)", squares.len());
    for sq in &squares {
        println!(
            "side {:.12}  residual {:.2e}  sigma_min {:.3e}  graceful {}",
            sq.side,
            sq.residual_norm,
            sq.jacobian_sigma_min,
            classify_graceful(&sq.vertices)?
        );
        for v in &sq.vertices {
            println!("  ({:+.12}, {:+.12})", v[0], v[1]);
        }
    }
    println!("expected half-width {ELLIPSE_SQUARE_HALF_WIDTH:.12}");
    Ok(())
}
