//! Batched annotation through a BERN2-compatible NER/NEN backend.
//!
//! The wire contract is a POST of `{"texts": [...]}` answered by
//! `{"results": [{"annotations": [{"mention", "span": {"begin", "end"}, "obj", "id": [...]}]}]}`,
//! results aligned with texts by index and spans in character offsets.

mod batch;
mod http;
mod mock;
mod wire;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::NormalizedAnnotation;

pub use batch::annotate_batch;
pub use http::HttpNerBackend;
pub use mock::{load_mock_lexicon, MockNerBackend};
pub use wire::{
    decode_response, parse_backend_response, NerRequest, NerResponse, NerResult, WireAnnotation, WireSpan, CUI_LESS,
    DISEASE_OBJ,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint: String,
    pub batch_size: usize,
    pub max_inflight: usize,
    pub retry_budget: u32,
    pub timeout_ms: u64,
    /// Linear backoff step between retries.
    pub backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: "http://localhost:8888/plain".to_string(),
            batch_size: 16,
            max_inflight: 4,
            retry_budget: 2,
            timeout_ms: 30_000,
            backoff_ms: 200,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.batch_size == 0 {
            return Err("batch_size must be at least 1".into());
        }
        if self.max_inflight == 0 {
            return Err("max_inflight must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl BackendError {
    /// Transport failures and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status >= 500 || *status == 429,
            BackendError::Malformed(_) => false,
        }
    }
}

/// Something that answers the NER wire contract with a raw response body.
pub trait NerBackend: Send + Sync {
    fn name(&self) -> &str;
    fn submit(&self, request: &NerRequest) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Ok,
    Failed,
}

/// Result of annotating one record. Failed outcomes carry a reason and no
/// annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationOutcome {
    pub record_id: String,
    /// The exact text submitted to the backend; spans index this text.
    pub text: String,
    pub status: OutcomeStatus,
    #[serde(default)]
    pub annotations: Vec<NormalizedAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AnnotationOutcome {
    pub fn ok(record_id: String, text: String, annotations: Vec<NormalizedAnnotation>) -> Self {
        AnnotationOutcome { record_id, text, status: OutcomeStatus::Ok, annotations, error: None }
    }

    pub fn failed(record_id: String, text: String, reason: String) -> Self {
        AnnotationOutcome {
            record_id,
            text,
            status: OutcomeStatus::Failed,
            annotations: Vec::new(),
            error: Some(reason),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == OutcomeStatus::Ok
    }
}
