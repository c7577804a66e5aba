use serde::{Deserialize, Serialize};

use super::OntologyConcept;
use crate::corpus::MeshId;

/// Retrieval document rendered from one concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RagDocument {
    pub concept_id: MeshId,
    pub body: String,
}

fn synonym_list(concept: &OntologyConcept) -> String {
    if concept.synonyms.is_empty() {
        "(none)".to_string()
    } else {
        concept.synonyms.join("; ")
    }
}

/// `NAME / ID / DESCRIPTION / SYNONYMS`, one labelled field per line.
pub fn build_rag_document(concept: &OntologyConcept) -> RagDocument {
    RagDocument {
        concept_id: concept.concept_id.clone(),
        body: format!(
            "NAME: {}\nID: {}\nDESCRIPTION: {}\nSYNONYMS: {}",
            concept.preferred_name,
            concept.concept_id,
            concept.description,
            synonym_list(concept)
        ),
    }
}

/// The text that gets embedded for retrieval: the document without its id.
pub(crate) fn retrieval_text(concept: &OntologyConcept) -> String {
    let synonyms = if concept.synonyms.is_empty() { String::new() } else { concept.synonyms.join("; ") };
    format!("{}\n{}\n{}", concept.preferred_name, concept.description, synonyms)
}
