use std::process::ExitCode;

use clap::Parser;

use nrcg_battery_cli::commands::{execute, Command, CommonArgs};

/// Quantum-battery charging with Nth-root CNOT gates.
#[derive(Debug, Parser)]
#[command(name = "nrcg-battery", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    match execute(&cli.command, &cli.args, &mut stdout, &mut stderr) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
