use std::process::ExitCode;

use clap::Parser;
use smoothspatial_cli::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.report);
            match out.status {
                Status::Satisfied => ExitCode::SUCCESS,
                Status::Unsatisfied => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
