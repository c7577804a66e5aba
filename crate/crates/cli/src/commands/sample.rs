use std::path::PathBuf;

use clap::Args;
use phenokit::corpus::{stratified_sample, write_records, IngestOptions};

use super::load_corpus;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Sample size; half is drawn from records expecting a disease.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn execute(args: &SampleArgs, config: &RunConfig) -> CliResult<()> {
    let corpus_path = args.corpus.clone().unwrap_or_else(|| config.corpus_path());
    let n = args
        .n
        .or(config.corpus.sample_size)
        .ok_or_else(|| CliError::Usage("no sample size; pass --n or set corpus.sample_size".into()))?;
    let seed = args.seed.unwrap_or(config.seed);
    let output = args.output.clone().unwrap_or_else(|| config.output("sample.jsonl"));
    let corpus = load_corpus(&corpus_path, &IngestOptions::default())?;
    let sample = stratified_sample(&corpus, n, seed).map_err(CliError::validation)?;

    let manifest_path = config.manifest_path("sample");
    let mut manifest = RunManifest::start("sample", seed, config.snapshot(), &[&corpus_path])?;
    manifest.write(&manifest_path)?;
    let mut bytes = Vec::new();
    write_records(&sample, &mut bytes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&output, &bytes)?;
    manifest.finish(&manifest_path, &[&output], RunStatus::Complete)?;
    println!("sampled {} of {} records into {}", sample.len(), corpus.len(), output.display());
    Ok(())
}
