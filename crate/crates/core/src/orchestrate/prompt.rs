use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::templates::{TemplateError, TemplateRegistry};
use crate::corpus::{ConceptId, NormalizedAnnotation, SurveyRecord};
use crate::ontology::RagDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CotVariant {
    None,
    Simple,
    /// Simple directive plus a four-step reasoning scaffold.
    Strong,
    /// Strong scaffold plus few-shot examples.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    ZeroShotConceptVsConcept,
    ZeroShotConceptVsMention,
    FewShot,
    Cot { variant: CotVariant },
    RagFsi,
    RagFsiFlags { use_rag: bool, use_fsi: bool },
}

impl Strategy {
    pub const NAMES: [&'static str; 10] = [
        "zero-shot",
        "zero-shot:mention",
        "fsi",
        "cot:none",
        "cot:simple",
        "cot:strong",
        "cot:hybrid",
        "rag-fsi",
        "rag-fsi-flags",
        "zero-shot:concept",
    ];

    /// Parses a strategy name; `rag-fsi-flags` starts with both flags on.
    pub fn from_name(name: &str) -> Result<Self, String> {
        Ok(match name {
            "zero-shot" | "zero-shot:concept" => Strategy::ZeroShotConceptVsConcept,
            "zero-shot:mention" => Strategy::ZeroShotConceptVsMention,
            "fsi" => Strategy::FewShot,
            "cot:none" => Strategy::Cot { variant: CotVariant::None },
            "cot:simple" => Strategy::Cot { variant: CotVariant::Simple },
            "cot:strong" => Strategy::Cot { variant: CotVariant::Strong },
            "cot:hybrid" => Strategy::Cot { variant: CotVariant::Hybrid },
            "rag-fsi" => Strategy::RagFsi,
            "rag-fsi-flags" => Strategy::RagFsiFlags { use_rag: true, use_fsi: true },
            other => return Err(format!("unknown strategy {other:?}; valid strategies: {}", Self::NAMES.join(", "))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Strategy::ZeroShotConceptVsConcept => "zero-shot".into(),
            Strategy::ZeroShotConceptVsMention => "zero-shot:mention".into(),
            Strategy::FewShot => "fsi".into(),
            Strategy::Cot { variant } => format!(
                "cot:{}",
                match variant {
                    CotVariant::None => "none",
                    CotVariant::Simple => "simple",
                    CotVariant::Strong => "strong",
                    CotVariant::Hybrid => "hybrid",
                }
            ),
            Strategy::RagFsi => "rag-fsi".into(),
            Strategy::RagFsiFlags { use_rag, use_fsi } => {
                let on = |b: &bool| if *b { "on" } else { "off" };
                format!("rag-fsi-flags(rag={},fsi={})", on(use_rag), on(use_fsi))
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A strategy plus its shot count and retrieval depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub strategy: Strategy,
    pub shots: usize,
    pub retrieval_k: usize,
}

pub const ALLOWED_SHOTS: [usize; 5] = [0, 1, 2, 3, 5];

impl PromptSpec {
    pub fn new(strategy: Strategy) -> Self {
        let shots = match strategy {
            Strategy::FewShot | Strategy::RagFsi | Strategy::Cot { variant: CotVariant::Hybrid } => 5,
            Strategy::RagFsiFlags { use_fsi: true, .. } => 5,
            _ => 0,
        };
        PromptSpec { strategy, shots, retrieval_k: 3 }
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_retrieval_k(mut self, k: usize) -> Self {
        self.retrieval_k = k;
        self
    }

    pub fn uses_rag(&self) -> bool {
        matches!(self.strategy, Strategy::RagFsi | Strategy::RagFsiFlags { use_rag: true, .. })
    }

    /// Whether few-shot examples are rendered.
    pub fn uses_fsi(&self) -> bool {
        match self.strategy {
            Strategy::FewShot => self.shots > 0,
            Strategy::RagFsi
            | Strategy::Cot { variant: CotVariant::Hybrid }
            | Strategy::RagFsiFlags { use_fsi: true, .. } => true,
            _ => false,
        }
    }

    /// Number of examples the strategy consumes.
    pub fn effective_shots(&self) -> usize {
        if self.uses_fsi() {
            self.shots
        } else {
            0
        }
    }

    fn cot_template(&self) -> Option<&'static str> {
        match self.strategy {
            Strategy::Cot { variant: CotVariant::Simple } => Some("cot_simple"),
            Strategy::Cot { variant: CotVariant::Strong | CotVariant::Hybrid } => Some("cot_strong"),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if !ALLOWED_SHOTS.contains(&self.shots) {
            return Err(PromptError::InvalidSpec(format!("shot count {} not in {:?}", self.shots, ALLOWED_SHOTS)));
        }
        if self.uses_rag() && self.retrieval_k == 0 {
            return Err(PromptError::InvalidSpec("retrieval_k must be at least 1 when retrieval is on".into()));
        }
        if self.uses_fsi() && self.shots == 0 {
            return Err(PromptError::InvalidSpec(format!("{} needs at least one few-shot example", self.strategy)));
        }
        Ok(())
    }
}

/// A worked example shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub question: String,
    pub mention: String,
    /// Rendered candidate concept, e.g. `Asthma (mesh:D001249)`.
    pub candidate: String,
    /// Expected model answer; must parse as AGREE or DISAGREE.
    pub expected: String,
}

/// Everything a prompt may draw on for one mention.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptContext {
    pub record: SurveyRecord,
    pub mention: NormalizedAnnotation,
    pub backend_concept: ConceptId,
    /// Preferred name of `backend_concept`, when the ontology knows it.
    pub backend_concept_name: Option<String>,
    pub retrieved_docs: Vec<RagDocument>,
    pub examples: Vec<FewShotExample>,
}

impl PromptContext {
    pub fn new(record: SurveyRecord, mention: NormalizedAnnotation) -> Self {
        let backend_concept = mention.concept.clone();
        PromptContext {
            record,
            mention,
            backend_concept,
            backend_concept_name: None,
            retrieved_docs: Vec::new(),
            examples: Vec::new(),
        }
    }

    fn concept_label(&self) -> String {
        match (&self.backend_concept, &self.backend_concept_name) {
            (ConceptId::Unnormalized, _) => "NONE (no concept assigned)".to_string(),
            (id, Some(name)) => format!("{name} ({id})"),
            (id, None) => format!("(name unknown) ({id})"),
        }
    }

    fn preceding_questions(&self) -> String {
        if self.record.preceding_questions.is_empty() {
            "(none)".to_string()
        } else {
            self.record.preceding_questions.iter().map(|q| format!("- {q}")).collect::<Vec<_>>().join("\n")
        }
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("prompt is missing its {0} section")]
    MissingSection(&'static str),
    #[error("invalid prompt spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

fn render_documents(templates: &TemplateRegistry, docs: &[RagDocument]) -> Result<String, TemplateError> {
    let mut parts = vec![templates.render("documents_header", &[])?];
    for (i, doc) in docs.iter().enumerate() {
        parts.push(templates.render("document", &[("index", &(i + 1).to_string()), ("body", &doc.body)])?);
    }
    Ok(parts.join("\n\n"))
}

fn render_examples(templates: &TemplateRegistry, examples: &[FewShotExample]) -> Result<String, TemplateError> {
    let mut parts = vec![templates.render("examples_header", &[])?];
    for (i, ex) in examples.iter().enumerate() {
        parts.push(templates.render(
            "example",
            &[
                ("index", &(i + 1).to_string()),
                ("question", &ex.question),
                ("mention", &ex.mention),
                ("candidate", &ex.candidate),
                ("verdict", &ex.expected),
            ],
        )?);
    }
    Ok(parts.join("\n\n"))
}

fn render_case(templates: &TemplateRegistry, name: &str, ctx: &PromptContext) -> Result<String, TemplateError> {
    templates.render(
        name,
        &[
            ("preceding_questions", &ctx.preceding_questions()),
            ("question", &ctx.record.question_text),
            ("answer", &ctx.record.answer_text),
            ("mention", &ctx.mention.surface),
            ("concept", &ctx.concept_label()),
        ],
    )
}

/// Renders the agreement prompt for `spec`.
///
/// Sections, separated by blank lines and always in this order: task
/// instruction, retrieved documents, few-shot examples, chain-of-thought
/// directive, the case, answer format. Sections the strategy does not use
/// are omitted even when the context carries data for them.
pub fn build_prompt(
    spec: &PromptSpec,
    ctx: &PromptContext,
    templates: &TemplateRegistry,
) -> Result<String, PromptError> {
    spec.validate()?;
    let by_mention = spec.strategy == Strategy::ZeroShotConceptVsMention;
    let mut sections = Vec::with_capacity(6);
    sections
        .push(templates.render(if by_mention { "task_concept_vs_mention" } else { "task_concept_vs_concept" }, &[])?);
    if spec.uses_rag() {
        if ctx.retrieved_docs.is_empty() {
            return Err(PromptError::MissingSection("retrieved documents"));
        }
        let take = ctx.retrieved_docs.len().min(spec.retrieval_k);
        sections.push(render_documents(templates, &ctx.retrieved_docs[..take])?);
    }
    if spec.uses_fsi() {
        if ctx.examples.is_empty() {
            return Err(PromptError::MissingSection("few-shot examples"));
        }
        let take = ctx.examples.len().min(spec.shots);
        sections.push(render_examples(templates, &ctx.examples[..take])?);
    }
    if let Some(cot) = spec.cot_template() {
        sections.push(templates.render(cot, &[])?);
    }
    sections.push(render_case(
        templates,
        if by_mention { "case_concept_vs_mention" } else { "case_concept_vs_concept" },
        ctx,
    )?);
    sections.push(templates.render("answer_format", &[])?);
    Ok(sections.join("\n\n"))
}

/// Prompt asking a generator model to propose a concept for the mention.
/// Retrieved documents are included when present.
pub fn build_generation_prompt(ctx: &PromptContext, templates: &TemplateRegistry) -> Result<String, PromptError> {
    let mut sections = vec![templates.render("task_generate", &[])?];
    if !ctx.retrieved_docs.is_empty() {
        sections.push(render_documents(templates, &ctx.retrieved_docs)?);
    }
    sections.push(render_case(templates, "case_generate", ctx)?);
    sections.push(templates.render("answer_generate", &[])?);
    Ok(sections.join("\n\n"))
}
