use std::path::PathBuf;

use clap::Args;
use phenokit::annotate::{annotate_batch, load_mock_lexicon, HttpNerBackend, MockNerBackend, NerBackend};
use phenokit::corpus::IngestOptions;

use super::load_corpus;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{to_jsonl, write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Use the offline mock backend with this `term<TAB>concept` lexicon.
    #[arg(long)]
    pub mock_lexicon: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn execute(args: &AnnotateArgs, config: &RunConfig) -> CliResult<()> {
    let corpus_path = args.corpus.clone().unwrap_or_else(|| config.corpus_path());
    let output = args.output.clone().unwrap_or_else(|| config.predictions_path());
    let backend_config = &config.ner.backend;
    backend_config.validate().map_err(CliError::Usage)?;
    let corpus = load_corpus(&corpus_path, &IngestOptions::default())?;

    let mock_lexicon = args.mock_lexicon.clone().or_else(|| config.ner.mock_lexicon.clone());
    let mut inputs = vec![corpus_path.clone()];
    let backend: Box<dyn NerBackend> = match &mock_lexicon {
        Some(path) => {
            let lexicon = load_mock_lexicon(path).map_err(|e| CliError::from_io(path, e))?;
            inputs.push(path.clone());
            Box::new(MockNerBackend::new(lexicon))
        }
        None => Box::new(HttpNerBackend::new(backend_config, std::env::var("PHENOKIT_NER_TOKEN").ok())),
    };

    let manifest_path = config.manifest_path("annotate");
    let input_refs: Vec<&std::path::Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut manifest = RunManifest::start("annotate", config.seed, config.snapshot(), &input_refs)?;
    manifest.write(&manifest_path)?;

    let outcomes = annotate_batch(corpus.records(), backend.as_ref(), backend_config);
    write_atomic(&output, &to_jsonl(&outcomes)?)?;
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.is_ok()).collect();
    let mentions: usize = outcomes.iter().map(|o| o.annotations.len()).sum();
    let total_outage = !outcomes.is_empty() && failed.len() == outcomes.len();
    let status = if total_outage { RunStatus::Failed } else { RunStatus::Complete };
    manifest.finish(&manifest_path, &[&output], status)?;

    println!(
        "{} records annotated via {}, {} mentions, {} failed",
        outcomes.len(),
        backend.name(),
        mentions,
        failed.len()
    );
    for f in &failed {
        eprintln!("  {}: {}", f.record_id, f.error.as_deref().unwrap_or("unknown error"));
    }
    println!("wrote {}", output.display());
    if total_outage {
        return Err(CliError::Backend(format!(
            "all {} records failed; partial results in {}",
            outcomes.len(),
            output.display()
        )));
    }
    Ok(())
}
