use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use tailmean_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli.command) {
        Ok(summary) => {
            if cli.command.args().output.is_none() {
                print!("{summary}");
            }
            eprintln!(
                "{} finished in {:.2}s",
                cli.command.name(),
                started.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
