mod args;
mod commands;
mod context;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use context::Context;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let mut ctx = Context::new(cli.command.name(), &cli.global)?;
    let c = &mut ctx;
    let report = match &cli.command {
        Command::Dist(a) => commands::dist(c, a),
        Command::Limits(a) => commands::limits(c, a),
        Command::EpiDist(a) => commands::epi_dist(c, a),
        Command::EpiBounds(a) => commands::epi_bounds(c, a),
        Command::Penalty => commands::penalty(c),
        Command::Cubic => commands::cubic(c),
        Command::Soften(a) => commands::soften(c, a),
        Command::KwDensity(a) => commands::kw_density(c, a),
        Command::Cp(a) => commands::cp(c, a),
        Command::Homotopy(a) => commands::homotopy(c, a),
        Command::Cones(a) => commands::cones(c, a),
    }?;
    output::emit(&ctx, &report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
