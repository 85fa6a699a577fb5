use std::process::ExitCode;

use clap::Parser;
use conductance_spectrum_cli::args::Cli;
use conductance_spectrum_cli::commands::run;

fn main() -> ExitCode {
    // clap exits with status 2 on malformed flags
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
