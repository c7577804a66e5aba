use std::path::PathBuf;

use clap::Args;
use phenokit::corpus::{write_records, IngestOptions};

use super::load_corpus;
use crate::config::{required, RunConfig};
use crate::error::{CliError, CliResult};
use crate::files::{write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw record file (JSONL).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Validated corpus destination.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn execute(args: &IngestArgs, config: &RunConfig) -> CliResult<()> {
    let input = args.input.clone().map(Some).unwrap_or_else(|| config.paths.records.clone());
    let input = required(&input, "records")?;
    let output = args.output.clone().unwrap_or_else(|| config.corpus_path());
    let options = IngestOptions { disease_keywords: config.corpus.disease_keywords.clone() };
    let corpus = load_corpus(&input, &options)?;

    let manifest_path = config.manifest_path("ingest");
    let mut manifest = RunManifest::start("ingest", config.seed, config.snapshot(), &[&input])?;
    manifest.write(&manifest_path)?;
    let mut bytes = Vec::new();
    write_records(corpus.records(), &mut bytes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&output, &bytes)?;
    manifest.finish(&manifest_path, &[&output], RunStatus::Complete)?;

    println!("{} records", corpus.len());
    for (field_type, count) in corpus.field_type_counts() {
        println!("  {field_type}: {count}");
    }
    let expected = corpus.records().iter().filter(|r| r.expects_disease).count();
    println!("  expects_disease: {expected}");
    println!("wrote {}", output.display());
    Ok(())
}
