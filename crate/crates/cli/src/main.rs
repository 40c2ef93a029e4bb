use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    pwsynth_cli::cli::main_with(pwsynth_cli::cli::Cli::parse())
}
