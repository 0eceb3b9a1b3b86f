use clap::Parser;

use suita_lab::cli;

fn main() {
    let args = cli::Cli::parse();
    std::process::exit(cli::run(args));
}
