use clap::Parser;

use squarepeg::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
