//! At radius π/2 a table is a square inscribed in a great circle whose four
//! vertices carry equal field values. Every continuous field has one.
//!
//! ```bash
//! cargo run --release --example great_circle_tables
//! ```

use std::f64::consts::FRAC_PI_2;

use squarepeg::fixtures::great_circle_fields;
use squarepeg::peg::SolveConfig;
use squarepeg::table::find_tables_direct;

fn main() -> squarepeg::Result<()> {
    let cfg = SolveConfig::default();
    for (i, f) in great_circle_fields().iter().enumerate() {
        let tables = find_tables_direct(f, FRAC_PI_2, &cfg)?;
        let best = tables.iter().map(|t| t.value_spread).fold(f64::INFINITY, f64::min);
        let kind = if f.even_only() { "even" } else { "mixed" };
        println!("field {i} ({kind}): {} table(s), smallest spread {best:.2e}", tables.len());
        if let Some(t) = tables.first() {
            println!("  center {:?}, phi {:.6}", t.x.xyz(), t.phi);
        }
    }
    Ok(())
}
