use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cyclereg::Cli::parse();
    match cyclereg::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(cyclereg::cli::EXIT_ERROR)
        }
    }
}
