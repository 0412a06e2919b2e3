use abox::cli::{run, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    std::process::exit(run(&cli.command));
}
