//! Counts graceful squares on a batch of seeded random curves. Counts vary
//! from curve to curve but stay odd.
//!
//! ```bash
//! cargo run --release --example parity_census -- 20
//! ```

use squarepeg::fixtures::random_curve;
use squarepeg::peg::{parity, SolveConfig};
use squarepeg::Error;

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = SolveConfig::default();
    let mut histogram = std::collections::BTreeMap::new();
    for seed in 0..n {
        let h = random_curve(seed);
        match parity(&h, &cfg) {
            Ok(report) => {
                println!("seed {seed:>3}: {} squares, parity {}", report.count, report.parity);
                *histogram.entry(report.count).or_insert(0) += 1;
            }
            Err(Error::GenericityFailure { sigma_min }) => {
                println!("seed {seed:>3}: skipped, near-singular root (sigma_min {sigma_min:.2e})");
            }
            Err(e) => println!("seed {seed:>3}: {e}"),
        }
    }
    for (count, curves) in histogram {
        println!("{count} squares: {curves} curve(s)");
    }
}
