//! Command-line front end: `mdir test` on a CSV file and `mdir simulate`
//! for the simulation studies.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod km;
pub mod output;
pub mod report;

use std::io::Write;

pub use args::Cli;
pub use error::CliError;

/// Sizes the global rayon pool from `MDIR_THREADS` if it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MDIR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("MDIR_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        args::Command::Test(a) => commands::cmd_test(a, stdout, stderr).map(|_| ()),
        args::Command::Simulate(a) => commands::cmd_simulate(a, stdout),
    }
}
