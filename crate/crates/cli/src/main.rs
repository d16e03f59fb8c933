use std::process::ExitCode;

use chimex_cli::{run_cli, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run_cli(&cli))
}
