use std::path::PathBuf;

use clap::Args;
use phenokit::ontology::VectorIndex;
use phenokit::orchestrate::{
    build_raft_dataset, check_datapoint, load_raft_questions, write_raft_dataset, RaftError, Retrieval,
};

use super::load_store;
use crate::config::{required, RunConfig};
use crate::error::{CliError, CliResult};
use crate::files::{open_input, write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct RaftArgs {
    /// JSONL of `{"question", "concept_id"}`.
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// Distractors per question.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw distractors at random instead of by retrieval.
    #[arg(long)]
    pub random_distractors: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn execute(args: &RaftArgs, config: &RunConfig) -> CliResult<()> {
    let n = args.n.unwrap_or(config.raft.n_distractors);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1 (distractors per question)".into()));
    }
    let seed = args.seed.unwrap_or(config.seed);
    let questions_path = args.questions.clone().map(Some).unwrap_or_else(|| config.paths.raft_questions.clone());
    let questions_path = required(&questions_path, "raft_questions")?;
    let ontology_path = args.ontology.clone().map(Some).unwrap_or_else(|| config.paths.ontology.clone());
    let ontology_path = required(&ontology_path, "ontology")?;
    let output = args.output.clone().unwrap_or_else(|| config.output("raft.jsonl"));

    let store = load_store(&ontology_path)?;
    let questions = load_raft_questions(open_input(&questions_path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", questions_path.display())))?;
    let provider = config.embedding.build()?;
    let use_retrieval = config.raft.retrieval && !args.random_distractors;
    let index = if use_retrieval {
        Some(VectorIndex::build(&store, provider.as_ref()).map_err(|e| CliError::Backend(e.to_string()))?)
    } else {
        None
    };
    let retrieval = index.as_ref().map(|index| Retrieval { index, provider: provider.as_ref() });
    let points = build_raft_dataset(&store, &questions, n, seed, retrieval).map_err(|e| match e {
        RaftError::Retrieval { .. } => CliError::Backend(e.to_string()),
        other => CliError::validation(other),
    })?;
    for (i, p) in points.iter().enumerate() {
        check_datapoint(p, n).map_err(|e| CliError::Validation(format!("datapoint {i} violates invariants: {e}")))?;
    }

    let manifest_path = config.manifest_path("raft");
    let mut manifest = RunManifest::start("raft", seed, config.snapshot(), &[&questions_path, &ontology_path])?;
    manifest.write(&manifest_path)?;
    let mut bytes = Vec::new();
    write_raft_dataset(&points, &mut bytes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&output, &bytes)?;
    manifest.finish(&manifest_path, &[&output], RunStatus::Complete)?;
    println!(
        "{} datapoints with {} distractors each ({})",
        points.len(),
        n,
        if use_retrieval { "retrieved hard negatives" } else { "random distractors" }
    );
    println!("wrote {}", output.display());
    Ok(())
}
