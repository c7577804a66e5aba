use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fewshot::{select_few_shot, FewShotError};
use super::llm::{complete_with_retry, LlmBackend, LlmConfig};
use super::prompt::{build_generation_prompt, build_prompt, FewShotExample, PromptContext, PromptError, PromptSpec};
use super::templates::TemplateRegistry;
use super::verdict::{detect_hallucination, extract_concept, parse_verdict, LlmVerdict, VerdictKind};
use crate::concurrency::ordered_parallel_map;
use crate::corpus::{ConceptId, NormalizedAnnotation, SurveyRecord};
use crate::ontology::{build_rag_document, EmbeddingProvider, OntologyStore, RagDocument, RetrievalError, VectorIndex};
use crate::seed::derive_item_seed;

/// A retrieval index together with the provider that embeds its queries.
#[derive(Clone, Copy)]
pub struct Retrieval<'a> {
    pub index: &'a VectorIndex,
    pub provider: &'a dyn EmbeddingProvider,
}

/// Read-only inputs shared by every annotation in a run.
#[derive(Clone, Copy)]
pub struct RunInputs<'a> {
    pub records: &'a [SurveyRecord],
    pub annotations: &'a [NormalizedAnnotation],
    pub store: &'a OntologyStore,
    pub retrieval: Option<Retrieval<'a>>,
    pub few_shot_pool: &'a [FewShotExample],
    pub templates: &'a TemplateRegistry,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("annotation {index} references unknown record {record_id:?}")]
    UnknownRecord { index: usize, record_id: String },
    #[error("strategy {0} needs a retrieval index")]
    RetrievalUnavailable(String),
    #[error("retrieval failed for annotation {index}: {source}")]
    Retrieval { index: usize, source: RetrievalError },
    #[error(transparent)]
    FewShot(#[from] FewShotError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// One annotation with the prompts sent for it and the resulting verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub annotation: NormalizedAnnotation,
    pub prompts: Vec<String>,
    pub verdict: LlmVerdict,
}

fn retrieval_query(mention: &NormalizedAnnotation, record: &SurveyRecord) -> String {
    format!("{} {}", mention.surface, record.question_text)
}

fn concept_name(store: &OntologyStore, id: &ConceptId) -> Option<String> {
    id.mesh().and_then(|m| store.get(m)).map(|c| c.preferred_name.clone())
}

fn index_records<'a>(inputs: &RunInputs<'a>) -> Result<HashMap<&'a str, &'a SurveyRecord>, StrategyError> {
    let by_id: HashMap<&str, &SurveyRecord> = inputs.records.iter().map(|r| (r.record_id.as_str(), r)).collect();
    for (index, a) in inputs.annotations.iter().enumerate() {
        if !by_id.contains_key(a.record_id.as_str()) {
            return Err(StrategyError::UnknownRecord { index, record_id: a.record_id.clone() });
        }
    }
    Ok(by_id)
}

fn check_inputs(inputs: &RunInputs<'_>, spec: &PromptSpec) -> Result<(), StrategyError> {
    spec.validate()?;
    if spec.uses_rag() && inputs.retrieval.is_none() {
        return Err(StrategyError::RetrievalUnavailable(spec.strategy.name()));
    }
    let shots = spec.effective_shots();
    if shots > inputs.few_shot_pool.len() {
        return Err(FewShotError::PoolTooSmall { requested: shots, available: inputs.few_shot_pool.len() }.into());
    }
    Ok(())
}

/// Builds the context for annotation `index`, retrieving documents and
/// drawing examples as `spec` requires.
fn build_context(
    inputs: &RunInputs<'_>,
    spec: &PromptSpec,
    record: &SurveyRecord,
    index: usize,
    seed: u64,
) -> Result<PromptContext, StrategyError> {
    let mention = &inputs.annotations[index];
    let mut ctx = PromptContext::new(record.clone(), mention.clone());
    ctx.backend_concept_name = concept_name(inputs.store, &ctx.backend_concept);
    if spec.uses_rag() {
        let retrieval = inputs.retrieval.ok_or_else(|| StrategyError::RetrievalUnavailable(spec.strategy.name()))?;
        ctx.retrieved_docs = retrieve_documents(inputs.store, retrieval, mention, record, spec.retrieval_k)
            .map_err(|source| StrategyError::Retrieval { index, source })?;
    }
    let shots = spec.effective_shots();
    if shots > 0 {
        ctx.examples = select_few_shot(inputs.few_shot_pool, shots, derive_item_seed(seed, "fsi", index))?;
    }
    Ok(ctx)
}

fn retrieve_documents(
    store: &OntologyStore,
    retrieval: Retrieval<'_>,
    mention: &NormalizedAnnotation,
    record: &SurveyRecord,
    k: usize,
) -> Result<Vec<RagDocument>, RetrievalError> {
    let query = retrieval_query(mention, record);
    let hits = retrieval.index.retrieve(store, &mention.surface, &query, k, retrieval.provider)?;
    Ok(hits.iter().filter_map(|(id, _)| store.get(id)).map(build_rag_document).collect())
}

fn judge(llm: &dyn LlmBackend, prompt: &str, config: &LlmConfig, store: &OntologyStore) -> LlmVerdict {
    match complete_with_retry(llm, prompt, config) {
        Ok(text) => {
            let mut verdict = parse_verdict(&text);
            verdict.hallucinated = detect_hallucination(&verdict, store);
            verdict
        }
        Err(e) => LlmVerdict::failed(format!("{} (after up to {} retries)", e, config.retry_budget)),
    }
}

/// Asks `llm` to judge every backend annotation under `spec`.
///
/// Output order equals annotation order. Backend failures that survive the
/// retry budget yield an `Unparseable` verdict carrying the error.
pub fn run_strategy(
    inputs: &RunInputs<'_>,
    spec: &PromptSpec,
    llm: &dyn LlmBackend,
    config: &LlmConfig,
    seed: u64,
) -> Result<Vec<Judgement>, StrategyError> {
    check_inputs(inputs, spec)?;
    let by_id = index_records(inputs)?;
    ordered_parallel_map(inputs.annotations, config.max_inflight, |index, annotation| {
        let ctx = build_context(inputs, spec, by_id[annotation.record_id.as_str()], index, seed)?;
        let prompt = build_prompt(spec, &ctx, inputs.templates)?;
        let verdict = judge(llm, &prompt, config, inputs.store);
        Ok(Judgement { annotation: annotation.clone(), prompts: vec![prompt], verdict })
    })
    .into_iter()
    .collect()
}

/// Outcome of a generator/evaluator chain for one mention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainVerdict {
    /// Parsed evaluator verdict, or the generator failure when the chain
    /// stopped early.
    pub verdict: LlmVerdict,
    /// Concept the chain settled on: the generator's proposal on agreement,
    /// otherwise the evaluator's counter-proposal.
    pub accepted: Option<ConceptId>,
    pub generator_text: String,
    pub generator_proposal: Option<ConceptId>,
    pub prompts: Vec<String>,
}

/// Generator proposes a concept for the mention; evaluator judges the
/// proposal with the agreement prompt for `spec`. An unusable generator
/// answer stops the chain before the evaluator is called.
pub fn chain_validate(
    generator: &dyn LlmBackend,
    evaluator: &dyn LlmBackend,
    ctx: &PromptContext,
    spec: &PromptSpec,
    templates: &TemplateRegistry,
    store: &OntologyStore,
    config: &LlmConfig,
) -> Result<ChainVerdict, PromptError> {
    let gen_prompt = build_generation_prompt(ctx, templates)?;
    let (gen_text, gen_error) = match complete_with_retry(generator, &gen_prompt, config) {
        Ok(text) => (text, None),
        Err(e) => (String::new(), Some(e.to_string())),
    };
    let Some(proposal) = extract_concept(&gen_text) else {
        let mut verdict = LlmVerdict::unparseable(&gen_text);
        verdict.error = gen_error;
        return Ok(ChainVerdict {
            verdict,
            accepted: None,
            generator_text: gen_text,
            generator_proposal: None,
            prompts: vec![gen_prompt],
        });
    };
    let mut eval_ctx = ctx.clone();
    eval_ctx.backend_concept_name = concept_name(store, &proposal);
    eval_ctx.backend_concept = proposal.clone();
    let eval_prompt = build_prompt(spec, &eval_ctx, templates)?;
    let verdict = judge(evaluator, &eval_prompt, config, store);
    let accepted = match verdict.kind {
        VerdictKind::Agree => Some(proposal.clone()),
        VerdictKind::Disagree => verdict.proposal.clone(),
        VerdictKind::Unparseable => None,
    };
    Ok(ChainVerdict {
        verdict,
        accepted,
        generator_text: gen_text,
        generator_proposal: Some(proposal),
        prompts: vec![gen_prompt, eval_prompt],
    })
}

/// Restates a chain outcome as a verdict on the backend's own concept:
/// agreement when the chain settles on the backend concept, disagreement
/// carrying the settled concept otherwise.
pub fn chain_to_backend_verdict(chain: &ChainVerdict, backend: &ConceptId, store: &OntologyStore) -> LlmVerdict {
    let raw = chain.verdict.raw_text.as_str();
    let mut verdict = match (chain.verdict.kind, &chain.accepted) {
        (VerdictKind::Unparseable, _) => chain.verdict.clone(),
        (_, Some(id)) if id == backend => LlmVerdict::agree(raw),
        (_, accepted) => LlmVerdict::disagree(raw, accepted.clone()),
    };
    verdict.hallucinated = detect_hallucination(&verdict, store);
    verdict
}

/// [`chain_validate`] over every annotation, verdicts restated relative to
/// the backend concept.
pub fn run_chain(
    inputs: &RunInputs<'_>,
    spec: &PromptSpec,
    generator: &dyn LlmBackend,
    evaluator: &dyn LlmBackend,
    config: &LlmConfig,
    seed: u64,
) -> Result<Vec<Judgement>, StrategyError> {
    check_inputs(inputs, spec)?;
    let by_id = index_records(inputs)?;
    ordered_parallel_map(inputs.annotations, config.max_inflight, |index, annotation| {
        let ctx = build_context(inputs, spec, by_id[annotation.record_id.as_str()], index, seed)?;
        let chain = chain_validate(generator, evaluator, &ctx, spec, inputs.templates, inputs.store, config)?;
        let verdict = chain_to_backend_verdict(&chain, &annotation.concept, inputs.store);
        Ok(Judgement { annotation: annotation.clone(), prompts: chain.prompts, verdict })
    })
    .into_iter()
    .collect()
}
