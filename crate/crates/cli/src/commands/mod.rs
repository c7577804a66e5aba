pub mod annotate;
pub mod eval;
pub mod ingest;
pub mod raft;
pub mod run;
pub mod sample;

use std::io::BufRead;
use std::path::Path;

use phenokit::annotate::AnnotationOutcome;
use phenokit::corpus::{import_doccano, ingest_records, Corpus, GroundTruth, IngestError, IngestOptions};
use phenokit::ontology::{load_ontology, OntologyStore};

use crate::error::{CliError, CliResult};
use crate::files::open_input;

pub fn load_corpus(path: &Path, options: &IngestOptions) -> CliResult<Corpus> {
    ingest_records(open_input(path)?, options).map_err(|e| match e {
        IngestError::Io(io) => CliError::from_io(path, io),
        other => CliError::Validation(format!("{}: {other}", path.display())),
    })
}

pub fn load_store(path: &Path) -> CliResult<OntologyStore> {
    load_ontology(open_input(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_gold(path: &Path) -> CliResult<GroundTruth> {
    import_doccano(open_input(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_outcomes(path: &Path) -> CliResult<Vec<AnnotationOutcome>> {
    let mut out = Vec::new();
    for (i, line) in open_input(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::from_io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str(&line)
            .map_err(|e| CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(outcome);
    }
    Ok(out)
}
