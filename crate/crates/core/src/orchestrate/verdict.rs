use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{ConceptId, MeshId};
use crate::ontology::OntologyStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Agree,
    Disagree,
    Unparseable,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Agree => "agree",
            VerdictKind::Disagree => "disagree",
            VerdictKind::Unparseable => "unparseable",
        }
    }
}

/// A model's judgement of a concept assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmVerdict {
    pub kind: VerdictKind,
    /// Counter-proposal; only ever set on `Disagree`.
    pub proposal: Option<ConceptId>,
    pub raw_text: String,
    pub hallucinated: bool,
    /// Backend failure detail when no text was obtained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LlmVerdict {
    pub fn agree(raw_text: &str) -> Self {
        LlmVerdict {
            kind: VerdictKind::Agree,
            proposal: None,
            raw_text: raw_text.to_string(),
            hallucinated: false,
            error: None,
        }
    }

    pub fn disagree(raw_text: &str, proposal: Option<ConceptId>) -> Self {
        LlmVerdict {
            kind: VerdictKind::Disagree,
            proposal,
            raw_text: raw_text.to_string(),
            hallucinated: false,
            error: None,
        }
    }

    pub fn unparseable(raw_text: &str) -> Self {
        LlmVerdict {
            kind: VerdictKind::Unparseable,
            proposal: None,
            raw_text: raw_text.to_string(),
            hallucinated: false,
            error: None,
        }
    }

    pub fn failed(error: String) -> Self {
        LlmVerdict { error: Some(error), ..Self::unparseable("") }
    }
}

fn mesh_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"mesh:D([0-9]+)").expect("static pattern"))
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Maps any model output to a verdict. The first standalone `AGREE` or
/// `DISAGREE` token (any case) decides; on `DISAGREE` the first
/// `mesh:D<digits>` anywhere in the text becomes the proposal.
pub fn parse_verdict(text: &str) -> LlmVerdict {
    let kind = text
        .split(|c: char| !is_word_char(c))
        .find_map(|token| {
            if token.eq_ignore_ascii_case("agree") {
                Some(VerdictKind::Agree)
            } else if token.eq_ignore_ascii_case("disagree") {
                Some(VerdictKind::Disagree)
            } else {
                None
            }
        })
        .unwrap_or(VerdictKind::Unparseable);
    match kind {
        VerdictKind::Agree => LlmVerdict::agree(text),
        VerdictKind::Disagree => LlmVerdict::disagree(text, extract_concept(text)),
        VerdictKind::Unparseable => LlmVerdict::unparseable(text),
    }
}

/// First `mesh:D<digits>` in `text`.
pub fn extract_concept(text: &str) -> Option<ConceptId> {
    mesh_pattern().captures(text).and_then(|c| MeshId::new(&format!("D{}", &c[1]))).map(ConceptId::Mesh)
}

/// True iff the verdict proposes a concept the ontology does not contain.
pub fn detect_hallucination(verdict: &LlmVerdict, store: &OntologyStore) -> bool {
    match &verdict.proposal {
        Some(id) => !store.contains(id),
        None => false,
    }
}
