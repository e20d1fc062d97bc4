//! For each base point on a coarse grid, build the fiber curve of an even
//! field and count its graceful squares. The count is odd wherever the
//! fiber is generic.
//!
//! ```bash
//! cargo run --release --example fiber_parity
//! ```

use std::f64::consts::PI;

use squarepeg::fixtures::even_fields;
use squarepeg::peg::SolveConfig;
use squarepeg::table::{fiber_parity_sweep, FiberStatus};

fn main() -> squarepeg::Result<()> {
    let f = &even_fields()[0];
    let report = fiber_parity_sweep(f, PI / 6.0, 6, 12, &SolveConfig::default())?;
    let mut counts = std::collections::BTreeMap::new();
    for p in &report.points {
        if let FiberStatus::Generic { count, .. } = p.status {
            *counts.entry(count).or_insert(0usize) += 1;
        }
    }
    println!("{} base points, {} generic, {} odd", report.points.len(), report.generic, report.odd);
    for (count, n) in counts {
        println!("  {n:>3} fiber(s) with {count} square(s)");
    }
    println!("flagged fraction {:.3}, all generic odd: {}", report.flagged_fraction, report.all_generic_odd);
    Ok(())
}
