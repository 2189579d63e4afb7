use clap::Parser;
use pitchflap::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli.command, &cli.opts));
}
