//! MeSH-style disease ontology: loading, RAG documents, embeddings and lookup.

mod document;
mod embed;
mod index;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ConceptId, MeshId};

pub use document::{build_rag_document, RagDocument};
pub use embed::{
    embed, stem, tokenize, EmbedError, EmbeddingProvider, EmbeddingVector, HashedBagOfWords, RemoteEmbeddingProvider,
    FALLBACK_DIMENSION,
};
pub use index::{cosine, CosineError, RetrievalError, VectorIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyConcept {
    pub concept_id: MeshId,
    pub preferred_name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("line {line}: malformed concept: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: duplicate concept_id {id}")]
    DuplicateConcept { line: usize, id: MeshId },
    #[error("line {line}: missing preferred_name")]
    MissingName { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Deserialize)]
struct RawConcept {
    concept_id: String,
    #[serde(default)]
    preferred_name: Option<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    synonyms: Vec<String>,
}

fn fold(term: &str) -> String {
    term.trim().to_lowercase()
}

/// Immutable concept store with a case-folded name/synonym index.
#[derive(Debug, Clone, Default)]
pub struct OntologyStore {
    concepts: BTreeMap<MeshId, OntologyConcept>,
    terms: HashMap<String, BTreeSet<MeshId>>,
}

impl OntologyStore {
    pub fn from_concepts(concepts: Vec<OntologyConcept>) -> Result<Self, OntologyError> {
        let mut store = OntologyStore::default();
        for (i, concept) in concepts.into_iter().enumerate() {
            store.add(concept, i + 1)?;
        }
        Ok(store)
    }

    fn add(&mut self, concept: OntologyConcept, line: usize) -> Result<(), OntologyError> {
        if concept.preferred_name.trim().is_empty() {
            return Err(OntologyError::MissingName { line });
        }
        if self.concepts.contains_key(&concept.concept_id) {
            return Err(OntologyError::DuplicateConcept { line, id: concept.concept_id });
        }
        for term in std::iter::once(&concept.preferred_name).chain(&concept.synonyms) {
            let key = fold(term);
            if !key.is_empty() {
                self.terms.entry(key).or_default().insert(concept.concept_id.clone());
            }
        }
        self.concepts.insert(concept.concept_id.clone(), concept);
        Ok(())
    }

    pub fn get(&self, id: &MeshId) -> Option<&OntologyConcept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        id.mesh().is_some_and(|m| self.concepts.contains_key(m))
    }

    /// Concepts in ascending id order.
    pub fn concepts(&self) -> impl Iterator<Item = &OntologyConcept> {
        self.concepts.values()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Concepts whose preferred name or a synonym equals `term` ignoring case
    /// and surrounding whitespace, in ascending id order.
    pub fn lookup_exact(&self, term: &str) -> Vec<&OntologyConcept> {
        self.terms
            .get(&fold(term))
            .map(|ids| ids.iter().filter_map(|id| self.concepts.get(id)).collect())
            .unwrap_or_default()
    }
}

/// Reads line-delimited concept objects.
pub fn load_ontology<R: BufRead>(reader: R) -> Result<OntologyStore, OntologyError> {
    let mut store = OntologyStore::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawConcept = serde_json::from_str(&line)
            .map_err(|e| OntologyError::Malformed { line: line_no, detail: e.to_string() })?;
        let concept_id =
            raw.concept_id.parse::<MeshId>().map_err(|detail| OntologyError::Malformed { line: line_no, detail })?;
        let preferred_name = raw.preferred_name.ok_or(OntologyError::MissingName { line: line_no })?;
        store.add(
            OntologyConcept { concept_id, preferred_name, description: raw.description, synonyms: raw.synonyms },
            line_no,
        )?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = concat!(
        r#"{"concept_id":"mesh:D001249","preferred_name":"Asthma","description":"Chronic airway inflammation.","synonyms":["asthma","bronchial asthma"]}"#,
        "\n",
        r#"{"concept_id":"mesh:D003876","preferred_name":"Dermatitis, Atopic","description":"Itchy skin inflammation.","synonyms":["eczema","atopic eczema"]}"#,
        "\n",
        r#"{"concept_id":"mesh:D004485","preferred_name":"Eczema","description":"Skin inflammation.","synonyms":["eczema"]}"#,
        "\n",
    );

    #[test]
    fn loads_fixture() {
        let store = load_ontology(FIXTURE.as_bytes()).unwrap();
        assert_eq!(store.len(), 3);
        for id in ["D001249", "D003876", "D004485"] {
            assert!(store.get(&MeshId::new(id).unwrap()).is_some());
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let input = format!("{}{}", FIXTURE, r#"{"concept_id":"mesh:D001249","preferred_name":"Again"}"#);
        let err = load_ontology(input.as_bytes()).unwrap_err();
        assert!(matches!(err, OntologyError::DuplicateConcept { line: 4, ref id } if id.identifier() == "D001249"));
    }

    #[test]
    fn empty_or_missing_name_rejected() {
        let err = load_ontology(r#"{"concept_id":"mesh:D000001","preferred_name":"  "}"#.as_bytes()).unwrap_err();
        assert!(matches!(err, OntologyError::MissingName { line: 1 }));
        let err = load_ontology(r#"{"concept_id":"mesh:D000001"}"#.as_bytes()).unwrap_err();
        assert!(matches!(err, OntologyError::MissingName { line: 1 }));
    }

    #[test]
    fn exact_lookup_folds_case_and_orders_by_id() {
        let store = load_ontology(FIXTURE.as_bytes()).unwrap();
        let hits: Vec<_> = store.lookup_exact(" Asthma ").iter().map(|c| c.concept_id.to_string()).collect();
        assert_eq!(hits, vec!["mesh:D001249"]);
        let hits: Vec<_> = store.lookup_exact("ECZEMA").iter().map(|c| c.concept_id.to_string()).collect();
        assert_eq!(hits, vec!["mesh:D003876", "mesh:D004485"]);
        assert!(store.lookup_exact("gout").is_empty());
    }

    #[test]
    fn contains_ignores_none() {
        let store = load_ontology(FIXTURE.as_bytes()).unwrap();
        assert!(store.contains(&"mesh:D001249".parse().unwrap()));
        assert!(!store.contains(&"mesh:D999999".parse().unwrap()));
        assert!(!store.contains(&ConceptId::Unnormalized));
    }
}
