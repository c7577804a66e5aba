//! Sentence embeddings behind a provider interface.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::scalar::Real;
use crate::seed::fnv1a;
use crate::transport::{JsonClient, TransportError};

pub const FALLBACK_DIMENSION: usize = 256;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EmbedError {
    #[error("text carries no tokens to embed")]
    Empty,
    #[error("embedding provider {provider:?} failed: {detail}")]
    Provider { provider: String, detail: String },
}

/// A unit-norm dense vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<F = f64> {
    values: Vec<F>,
}

impl<F: Real> EmbeddingVector<F> {
    /// L2-normalizes `raw`; `None` for an all-zero or non-finite vector.
    pub fn normalize(raw: Vec<F>) -> Option<Self> {
        let norm = raw.iter().fold(F::zero(), |acc, x| acc + *x * *x).sqrt();
        if norm == F::zero() || !norm.is_finite() {
            return None;
        }
        Some(EmbeddingVector { values: raw.into_iter().map(|x| x / norm).collect() })
    }

    pub fn norm(&self) -> F {
        self.values.iter().fold(F::zero(), |acc, x| acc + *x * *x).sqrt()
    }
}

impl<F> EmbeddingVector<F> {
    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

pub trait EmbeddingProvider: Send + Sync {
    /// Label used in reports, e.g. `default`, `pubmed`, `jina`.
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

/// Embeds `text` with `provider`, rejecting blank input up front.
pub fn embed(text: &str, provider: &dyn EmbeddingProvider) -> Result<EmbeddingVector, EmbedError> {
    if text.trim().is_empty() {
        return Err(EmbedError::Empty);
    }
    provider.embed(text)
}

/// Suffix-stripping stemmer used for retrieval tokens only.
pub fn stem(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n <= 3 {
        return word.to_string();
    }
    let ends = |suffix: &str| word.ends_with(suffix);
    let cut = |k: usize| chars[..n - k].iter().collect::<String>();
    let has_vowel = |s: &str| s.chars().any(|c| "aeiouy".contains(c));
    if ends("sses") {
        return cut(2);
    }
    if ends("ies") && n > 4 {
        return cut(3) + "y";
    }
    if ends("ing") && n > 5 && has_vowel(&cut(3)) {
        return cut(3);
    }
    if ends("ed") && n > 4 && has_vowel(&cut(2)) {
        return cut(2);
    }
    if ends("s") && !ends("ss") && !ends("us") && !ends("is") {
        return cut(1);
    }
    word.to_string()
}

/// Lowercased Unicode word tokens, stem-folded.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| stem(&w.to_lowercase())).collect()
}

/// Deterministic fallback: stemmed tokens hashed (FNV-1a) into 256 buckets,
/// counts L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBagOfWords {
    name: String,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        HashedBagOfWords { name: "default".to_string() }
    }
}

impl HashedBagOfWords {
    pub fn named(name: &str) -> Self {
        HashedBagOfWords { name: name.to_string() }
    }

    pub fn bucket(token: &str) -> usize {
        (fnv1a(token.as_bytes()) % FALLBACK_DIMENSION as u64) as usize
    }
}

impl EmbeddingProvider for HashedBagOfWords {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        FALLBACK_DIMENSION
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let mut counts = vec![0.0_f64; FALLBACK_DIMENSION];
        for token in tokenize(text) {
            counts[Self::bucket(&token)] += 1.0;
        }
        EmbeddingVector::normalize(counts).ok_or(EmbedError::Empty)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Provider speaking `{"texts": [...]}` → `{"vectors": [[...]]}`.
#[derive(Debug, Clone)]
pub struct RemoteEmbeddingProvider {
    name: String,
    dimension: usize,
    client: JsonClient,
}

impl RemoteEmbeddingProvider {
    pub fn new(name: &str, endpoint: &str, dimension: usize, timeout: Duration, bearer_token: Option<String>) -> Self {
        RemoteEmbeddingProvider {
            name: name.to_string(),
            dimension,
            client: JsonClient::new(endpoint, timeout, bearer_token),
        }
    }

    fn fail(&self, detail: impl Into<String>) -> EmbedError {
        EmbedError::Provider { provider: self.name.clone(), detail: detail.into() }
    }
}

impl EmbeddingProvider for RemoteEmbeddingProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let mut vectors = self.embed_batch(&[text.to_string()])?;
        vectors.pop().ok_or_else(|| self.fail("empty response"))
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(EmbedError::Empty);
        }
        let body = self.client.post(&EmbedRequest { texts }).map_err(|e| match e {
            TransportError::Io(msg) => self.fail(msg),
            TransportError::Status { status, body } => self.fail(format!("status {status}: {body}")),
        })?;
        let response: EmbedResponse = serde_json::from_str(&body).map_err(|e| self.fail(e.to_string()))?;
        if response.vectors.len() != texts.len() {
            return Err(self.fail(format!("expected {} vectors, got {}", texts.len(), response.vectors.len())));
        }
        response
            .vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.dimension {
                    return Err(self.fail(format!("expected dimension {}, got {}", self.dimension, v.len())));
                }
                EmbeddingVector::normalize(v).ok_or_else(|| self.fail("degenerate vector"))
            })
            .collect()
    }
}
