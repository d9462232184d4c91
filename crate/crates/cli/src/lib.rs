//! File formats and the command-line front end of `gibbs-entropy-core`.
//!
//! The binary is a thin wrapper over [`run`]; the modules are public so the
//! acceptance suite and other tools can reuse the experiment runner and the
//! file formats.

pub mod cli;
pub mod commands;
pub mod config;
pub mod experiment;
pub mod formats;

use gibbs_entropy_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;
pub const EXIT_SATURATED: u8 = 5;

/// Dispatch a parsed command line.
pub fn run(cli: &cli::Cli) -> anyhow::Result<u8> {
    use cli::Command;
    match &cli.command {
        Command::Model(a) => commands::model(a),
        Command::Sample(a) => commands::sample(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Explaw(a) => commands::explaw(a),
    }
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<formats::ParseError>().is_some() {
        return EXIT_INPUT;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidInput(_)) => EXIT_INPUT,
        Some(Error::Hypothesis { .. }) => EXIT_HYPOTHESIS,
        Some(Error::NoConvergence { .. } | Error::Numerical(_) | Error::Identity(_) | Error::FitImpossible(_)) => {
            EXIT_VIOLATION
        }
        None => EXIT_OTHER,
    }
}
