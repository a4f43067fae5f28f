use std::process::ExitCode;

use clap::Parser;
use semmap_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match semmap_cli::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
