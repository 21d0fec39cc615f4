use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use declab::{execute, CliError, Command, Flags};

#[derive(Parser)]
#[command(name = "declab", version, about = "Numerical experiments for sharp mixed-norm paraboloid decoupling")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Region membership, lower bound and sharp exponent for (q, r, d)
    Exponent(Flags),
    /// Decoupling ratios of an extremizer family along a delta ladder
    Lowerbound(Flags),
    /// Normalized exponential-sum norms along an N ladder
    Expsum(Flags),
    /// Run the invariant suites
    Selftest(Flags),
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (command, flags) = match cli.command {
        Sub::Exponent(f) => (Command::Exponent, f),
        Sub::Lowerbound(f) => (Command::Lowerbound, f),
        Sub::Expsum(f) => (Command::Expsum, f),
        Sub::Selftest(f) => (Command::Selftest, f),
    };
    let cfg = flags.resolve()?;
    let outcome = execute(command, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => std::io::stdout().write_all(outcome.text.as_bytes())?,
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("declab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
