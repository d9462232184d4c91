use std::process::ExitCode;

use clap::Parser;
use gibbs_entropy::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match gibbs_entropy::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(gibbs_entropy::exit_code(&e))
        }
    }
}
