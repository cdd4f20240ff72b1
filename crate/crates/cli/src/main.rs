mod args;
mod commands;
mod error;
mod output;
mod units;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::{CliError, CliResult};

fn load_config(path: &std::path::Path) -> CliResult<Command> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let command = match (cli.command, &cli.config) {
        (Some(c), None) => c,
        (None, Some(path)) => load_config(path)?,
        _ => return Err(CliError::Config("give a subcommand or --config FILE".into())),
    };
    let ctx = Context { diagnostics_dir: cli.emit_diagnostics };
    match &command {
        Command::Compute(a) => commands::compute(a, &ctx),
        Command::Sweep(a) => commands::sweep(a, &ctx),
        Command::FitBeta(a) => commands::fit(a, &ctx),
        Command::Pfa(a) => commands::pfa(a),
        Command::Limits(a) => commands::limits(a, &ctx),
        Command::Ratio(a) => commands::ratio(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
