//! LLM verification of backend concept assignments.
//!
//! Prompts are rendered from versioned templates for each strategy, sent to
//! an [`LlmBackend`], and parsed into [`LlmVerdict`]s. The module also chains
//! a generator with an evaluator and prepares RAFT training data.

mod fewshot;
mod llm;
mod prompt;
mod raft;
mod strategy;
mod templates;
mod verdict;

pub use fewshot::{load_few_shot_path, load_few_shot_pool, select_few_shot, FewShotError};
pub use llm::{
    complete_with_retry, HttpLlmBackend, LlmBackend, LlmConfig, LlmError, LlmParams, ScriptError, ScriptRule,
    ScriptedLlmBackend,
};
pub use prompt::{
    build_generation_prompt, build_prompt, CotVariant, FewShotExample, PromptContext, PromptError, PromptSpec,
    Strategy, ALLOWED_SHOTS,
};
pub use raft::{
    build_raft_dataset, check_datapoint, load_raft_questions, render_cot_answer, write_raft_dataset, RaftDatapoint,
    RaftError, RaftQuestion,
};
pub use strategy::{
    chain_to_backend_verdict, chain_validate, run_chain, run_strategy, ChainVerdict, Judgement, Retrieval, RunInputs,
    StrategyError,
};
pub use templates::{TemplateError, TemplateRegistry};
pub use verdict::{detect_hallucination, extract_concept, parse_verdict, LlmVerdict, VerdictKind};
