mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use run::{code, CliError, Outcome};

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Certify(a) => run::certify(a),
        Command::Solve(a) => run::solve(a),
        Command::Lift(a) => run::lift(a),
        Command::Reproduce(a) => run::reproduce_example(a),
        Command::Nucnorm(a) => run::nucnorm(a),
    }
}

fn emit(outcome: &Outcome) -> Result<(), CliError> {
    let text = sqvar_core::io::to_canonical_json(&outcome.report)?;
    match &outcome.out {
        Some(path) => run::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                code::USAGE
            } else {
                code::PASS
            };
            let _ = e.print();
            return ExitCode::from(status as u8);
        }
    };
    let status = match dispatch(&cli).and_then(|o| emit(&o).map(|_| o.code)) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(status as u8)
}
