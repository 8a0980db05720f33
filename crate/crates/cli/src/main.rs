mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;
use sumstate::config::RunConfig;

fn config_from(
    file: Option<&std::path::Path>,
    overrides: Vec<(&str, Option<String>)>,
) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        cfg.apply_file(path)?;
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Oracle(a) => commands::oracle(&config_from(a.config.as_deref(), a.overrides())?),
        Command::Train(a) => commands::train(&config_from(a.config.as_deref(), a.overrides())?),
        Command::Summarize(a) => commands::summarize(&config_from(a.config.as_deref(), a.overrides())?),
        Command::Evaluate { args, compare, csv } => commands::evaluate(
            &config_from(args.config.as_deref(), args.overrides())?,
            &compare,
            csv.as_deref(),
        ),
        Command::Rouge { candidate, reference } => commands::rouge(&candidate, &reference),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
