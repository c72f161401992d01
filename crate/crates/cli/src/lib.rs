//! Command-line front end: scenario and demonstration ingestion, runs, and
//! CSV, SVG and JSON outputs.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod scenario;
pub mod svg;

pub use args::Cli;
pub use commands::{Output, Status};
pub use error::CliError;

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    use args::Command;
    match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Optimize(a) => commands::optimize_all(a),
        Command::Learn(a) => commands::learn(a),
        Command::Accuracy(a) => commands::accuracy(a),
        Command::SynthDemos(a) => commands::synth_demos(a),
    }
}
