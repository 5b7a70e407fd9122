//! `taxacc`: prepare, augment, train, predict, evaluate and analyze
//! taxonomy-acceptability runs from a single TOML config.

mod artifacts;
mod commands;
mod config;
mod errors;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigOverrides, RunConfig};
use errors::CliError;

#[derive(Parser)]
#[command(name = "taxacc", version, about = "Taxonomy acceptability toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split the training data and index its vocabulary.
    Prepare(CommonArgs),
    /// Generate contextual-edit and translated training data.
    Augment(CommonArgs),
    /// Fit the configured model.
    Train(CommonArgs),
    /// Write predictions for the test file.
    Predict(CommonArgs),
    /// Score predictions and render metric tables.
    Evaluate(CommonArgs),
    /// Break errors down by sentence pattern.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured run directory.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Override the configured language (en, fr, it).
    #[arg(long)]
    language: Option<String>,
    /// Override the configured strategy or model name.
    #[arg(long)]
    strategy: Option<String>,
    /// Replace artifacts this command already wrote.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Extra predictions to include, as NAME=RUN_DIR (repeatable).
    #[arg(long, value_name = "NAME=RUN_DIR")]
    compare: Vec<String>,
}

impl CommonArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            seed: self.seed,
            run_dir: self.run_dir.clone(),
            language: self.language.clone(),
            strategy: self.strategy.clone(),
        }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(&self.config, &self.overrides())
    }
}

fn parse_compare(raw: &[String]) -> Result<Vec<(String, PathBuf)>, CliError> {
    raw.iter()
        .map(|entry| match entry.split_once('=') {
            Some((name, dir)) if !name.is_empty() && !dir.is_empty() => {
                Ok((name.to_string(), PathBuf::from(dir)))
            }
            _ => Err(CliError::config(format!(
                "--compare wants NAME=RUN_DIR, got {entry:?}"
            ))),
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare(args) => commands::prepare::run(&args.load()?, args.overwrite),
        Command::Augment(args) => commands::augment::run(&args.load()?, args.overwrite),
        Command::Train(args) => commands::train::run(&args.load()?, args.overwrite),
        Command::Predict(args) => commands::predict::run(&args.load()?, args.overwrite),
        Command::Evaluate(args) => commands::evaluate::run(&args.load()?, args.overwrite),
        Command::Analyze(args) => {
            let compare = parse_compare(&args.compare)?;
            commands::analyze::run(&args.common.load()?, &compare, args.common.overwrite)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
