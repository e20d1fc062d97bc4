//! Tables of an even field at several radii, found two ways: by solving the
//! equal-value equations directly and by looking for fiber squares whose
//! center sits at the base point. Each table also comes with its antipodal
//! companion.
//!
//! ```bash
//! cargo run --release --example even_field_tables
//! ```

use std::f64::consts::PI;

use squarepeg::fixtures::even_fields;
use squarepeg::peg::SolveConfig;
use squarepeg::sphere::point_set_distance;
use squarepeg::table::{antipodal_transport, find_tables_direct, find_tables_via_center, table_residual};

fn main() -> squarepeg::Result<()> {
    let cfg = SolveConfig::default();
    let f = &even_fields()[0];

    for a in [PI / 12.0, PI / 6.0, PI / 4.0, PI / 3.0] {
        let tables = find_tables_direct(f, a, &cfg)?;
        println!("a = {a:.4}: {} table(s)", tables.len());
        for t in &tables {
            let twin = antipodal_transport(f, t)?;
            let r = table_residual(f, &twin.x, a, twin.phi)?;
            let r_max = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            println!(
                "  x = ({:+.5}, {:+.5}, {:+.5})  spread {:.1e}  companion residual {:.1e}",
                t.x.xyz()[0],
                t.x.xyz()[1],
                t.x.xyz()[2],
                t.value_spread,
                r_max
            );
        }
    }

    let a = PI / 6.0;
    let direct = find_tables_direct(f, a, &cfg)?;
    let search = find_tables_via_center(f, a, &cfg)?;
    println!(
        "center route at a = {a:.4}: {} table(s), {} branch jump(s)",
        search.tables.len(),
        search.branch_jumps.len()
    );
    for t in &search.tables {
        let nearest = direct
            .iter()
            .map(|d| point_set_distance(&d.points, &t.points))
            .fold(f64::INFINITY, f64::min);
        println!("  center {:.1e}, distance to direct route {nearest:.1e}", t.center_norm.unwrap_or(f64::NAN));
    }
    Ok(())
}
