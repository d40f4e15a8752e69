use clap::Parser;
use padic_verify::config::Cli;

fn main() {
    std::process::exit(padic_verify::run(Cli::parse()));
}
