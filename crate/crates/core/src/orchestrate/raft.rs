use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::strategy::Retrieval;
use crate::corpus::MeshId;
use crate::ontology::{build_rag_document, OntologyConcept, OntologyStore, RagDocument, RetrievalError};
use crate::seed::derive_item_seed;

/// A training question paired with its gold concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaftQuestion {
    pub question: String,
    pub concept_id: MeshId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaftDatapoint {
    pub question: String,
    pub oracle_doc: RagDocument,
    pub distractor_docs: Vec<RagDocument>,
    pub cot_answer: String,
}

#[derive(Debug, Error)]
pub enum RaftError {
    #[error("at least one distractor is required")]
    ZeroDistractors,
    #[error("ontology has {available} concepts, {needed} needed for {needed_minus_one} distractors plus the oracle", needed_minus_one = needed - 1)]
    StoreTooSmall { needed: usize, available: usize },
    #[error("question {index}: concept {id} is not in the ontology")]
    UnknownOracle { index: usize, id: MeshId },
    #[error("question {index}: {source}")]
    Retrieval { index: usize, source: RetrievalError },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reasoning steps quoting the oracle concept, ending in `ANSWER: mesh:D…`.
pub fn render_cot_answer(concept: &OntologyConcept, question: &str) -> String {
    let synonyms = if concept.synonyms.is_empty() { "none listed".to_string() } else { concept.synonyms.join(", ") };
    let definition = if concept.description.is_empty() { "no description given" } else { concept.description.as_str() };
    format!(
        "Question: {question}\n\
         Step 1: The relevant reference document is {name} ({id}).\n\
         Step 2: {name} is defined as: {definition}. Synonyms: {synonyms}.\n\
         Step 3: The question matches {name}; the other documents describe different conditions.\n\
         ANSWER: {id}",
        name = concept.preferred_name,
        id = concept.concept_id,
    )
}

fn random_distractors(store: &OntologyStore, oracle: &MeshId, n: usize, seed: u64) -> Vec<MeshId> {
    let candidates: Vec<&MeshId> = store.concepts().map(|c| &c.concept_id).filter(|id| *id != oracle).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, candidates.len(), n).into_iter().map(|i| candidates[i].clone()).collect()
}

/// One datapoint per question. Distractors are the `n_distractors` nearest
/// non-oracle concepts when retrieval is available and the question is not
/// blank, otherwise a seeded random draw.
pub fn build_raft_dataset(
    store: &OntologyStore,
    questions: &[RaftQuestion],
    n_distractors: usize,
    seed: u64,
    retrieval: Option<Retrieval<'_>>,
) -> Result<Vec<RaftDatapoint>, RaftError> {
    if n_distractors == 0 {
        return Err(RaftError::ZeroDistractors);
    }
    if store.len() < n_distractors + 1 {
        return Err(RaftError::StoreTooSmall { needed: n_distractors + 1, available: store.len() });
    }
    questions
        .iter()
        .enumerate()
        .map(|(index, q)| {
            let oracle =
                store.get(&q.concept_id).ok_or_else(|| RaftError::UnknownOracle { index, id: q.concept_id.clone() })?;
            let distractors = match retrieval {
                Some(r) if !q.question.trim().is_empty() => r
                    .index
                    .top_k(&q.question, n_distractors + 1, r.provider)
                    .map_err(|source| RaftError::Retrieval { index, source })?
                    .into_iter()
                    .map(|(id, _)| id)
                    .filter(|id| *id != q.concept_id)
                    .take(n_distractors)
                    .collect(),
                _ => random_distractors(store, &q.concept_id, n_distractors, derive_item_seed(seed, "raft", index)),
            };
            Ok(RaftDatapoint {
                question: q.question.clone(),
                oracle_doc: build_rag_document(oracle),
                distractor_docs: distractors.iter().filter_map(|id| store.get(id)).map(build_rag_document).collect(),
                cot_answer: render_cot_answer(oracle, &q.question),
            })
        })
        .collect()
}

/// Checks oracle ∉ distractors, |distractors| = n and pairwise distinctness.
pub fn check_datapoint(point: &RaftDatapoint, n_distractors: usize) -> Result<(), String> {
    if point.distractor_docs.len() != n_distractors {
        return Err(format!("{} distractors, expected {n_distractors}", point.distractor_docs.len()));
    }
    if point.distractor_docs.iter().any(|d| d.concept_id == point.oracle_doc.concept_id) {
        return Err(format!("oracle {} appears among distractors", point.oracle_doc.concept_id));
    }
    let distinct: HashSet<&MeshId> = point.distractor_docs.iter().map(|d| &d.concept_id).collect();
    if distinct.len() != point.distractor_docs.len() {
        return Err("duplicate distractors".into());
    }
    Ok(())
}

#[derive(Serialize)]
struct ExportLine<'a> {
    question: &'a str,
    oracle: &'a str,
    distractors: Vec<&'a str>,
    cot_answer: &'a str,
}

/// Line-delimited `{"question", "oracle", "distractors", "cot_answer"}` with
/// documents rendered as their bodies.
pub fn write_raft_dataset<W: Write>(points: &[RaftDatapoint], mut writer: W) -> io::Result<()> {
    for p in points {
        let line = ExportLine {
            question: &p.question,
            oracle: &p.oracle_doc.body,
            distractors: p.distractor_docs.iter().map(|d| d.body.as_str()).collect(),
            cot_answer: &p.cot_answer,
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads `{"question", "concept_id"}` lines.
pub fn load_raft_questions<R: BufRead>(reader: R) -> Result<Vec<RaftQuestion>, RaftError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| RaftError::Malformed { line: i + 1, detail: e.to_string() })?);
    }
    Ok(out)
}
