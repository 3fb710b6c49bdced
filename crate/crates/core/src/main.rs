use clap::Parser;

use vrmorse::cli::{main_with, RunConfig};

fn main() {
    std::process::exit(main_with(RunConfig::parse()));
}
