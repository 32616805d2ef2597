use std::process::ExitCode;

use clap::Parser;
use strsub_cli::RunConfig;

fn main() -> ExitCode {
    ExitCode::from(strsub_cli::run(&RunConfig::parse()))
}
