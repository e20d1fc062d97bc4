//! Runs a TOML config through the same pipeline as the `squarepeg` binary
//! and writes the result document and its plot next to each other.
//!
//! ```bash
//! cargo run --release --example run_config -- crates/core/examples/configs/continuation.toml out/continuation
//! ```

use std::path::PathBuf;

use squarepeg::cli::{execute, RunConfig};
use squarepeg::svg::emit_svg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/ellipse.toml"));
    let stem = PathBuf::from(args.next().unwrap_or_else(|| "squarepeg-out".into()));

    let config = RunConfig::load(&config_path)?;
    let command = config.command.ok_or("config has no `command` key")?;
    let doc = execute(command, &config, None);

    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let json = stem.with_extension("json");
    let svg = stem.with_extension("svg");
    std::fs::write(&json, doc.to_json())?;
    emit_svg(&doc, &svg)?;
    println!("{command}: status {:?}, {} event(s)", doc.status, doc.events.len());
    println!("wrote {} and {}", json.display(), svg.display());
    std::process::exit(doc.exit_code());
}
