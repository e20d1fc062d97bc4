//! Deforms the ellipse into a random curve and follows its graceful square
//! the whole way, turning around at folds where two squares merge.
//!
//! ```bash
//! cargo run --release --example continuation -- 35
//! ```

use squarepeg::fixtures::random_curve;
use squarepeg::peg::{continue_from_ellipse, find_graceful_squares, SolveConfig};

fn main() -> squarepeg::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(35);
    let cfg = SolveConfig::default();
    let target = random_curve(seed);

    let trace = continue_from_ellipse(&target, &cfg, 40)?;
    println!("{} samples, {} fold(s)", trace.samples.len(), trace.folds.len());
    for fold in &trace.folds {
        println!("  fold at s = {:.6}, turning {:?}", fold.s, fold.direction);
    }
    let s_path: Vec<String> = trace.samples.iter().step_by(8).map(|t| format!("{:.3}", t.s)).collect();
    println!("s along the path: {}", s_path.join(" "));

    let end = &trace.endpoint;
    println!("endpoint side {:.9}, param {:?}", end.side, end.param);
    let found = find_graceful_squares(&target, &cfg)?;
    let nearest = found
        .iter()
        .map(|s| s.param.orbit_distance(&end.param))
        .fold(f64::INFINITY, f64::min);
    println!("{} squares on the target; endpoint is {nearest:.2e} from the nearest", found.len());
    Ok(())
}
