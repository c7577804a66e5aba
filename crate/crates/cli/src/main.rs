mod commands;
mod config;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliResult;

/// Disease phenotyping pipeline for survey records.
///
/// Exit codes: 0 success, 1 validation or usage error, 2 missing input,
/// 3 backend failure.
#[derive(Debug, Parser)]
#[command(name = "phenokit", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for results and manifests.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a raw record file and persist the corpus.
    Ingest(commands::ingest::IngestArgs),
    /// Draw a stratified annotation sample.
    Sample(commands::sample::SampleArgs),
    /// Run the NER backend (or the mock) over the corpus.
    Annotate(commands::annotate::AnnotateArgs),
    /// Judge backend annotations with an LLM strategy.
    Run(commands::run::RunArgs),
    /// Score predictions and verdicts against ground truth.
    Eval(commands::eval::EvalArgs),
    /// Build a RAFT training dataset.
    Raft(commands::raft::RaftArgs),
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    match &cli.command {
        Command::Ingest(a) => commands::ingest::execute(a, &config),
        Command::Sample(a) => commands::sample::execute(a, &config),
        Command::Annotate(a) => commands::annotate::execute(a, &config),
        Command::Run(a) => commands::run::execute(a, &config),
        Command::Eval(a) => commands::eval::execute(a, &config),
        Command::Raft(a) => commands::raft::execute(a, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
