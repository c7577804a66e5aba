use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::ontology::{cosine, embed, EmbedError, EmbeddingProvider};
use crate::scalar::{harmonic_mean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rouge<T> {
    pub n: usize,
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RougeError {
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
}

/// Lowercased Unicode word tokens.
pub fn rouge_tokens(text: &str) -> Vec<String> {
    text.unicode_words().map(str::to_lowercase).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// ROUGE-n with clipped n-gram counts. All three scores are zero when either
/// side has no n-grams.
pub fn rouge_n<T: Scalar>(candidate: &str, reference: &str, n: usize) -> Result<Rouge<T>, RougeError> {
    if n == 0 {
        return Err(RougeError::ZeroOrder);
    }
    Ok(rouge_n_tokens(&rouge_tokens(candidate), &rouge_tokens(reference), n))
}

/// [`rouge_n`] over pre-tokenised input; `n` must be positive.
pub fn rouge_n_tokens<T: Scalar>(candidate: &[String], reference: &[String], n: usize) -> Rouge<T> {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let cand_total: u64 = cand.values().sum();
    let ref_total: u64 = refs.values().sum();
    let overlap: u64 = cand.iter().map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0))).sum();
    let precision = T::ratio(overlap, cand_total).unwrap_or_else(T::zero);
    let recall = T::ratio(overlap, ref_total).unwrap_or_else(T::zero);
    if cand_total == 0 || ref_total == 0 {
        return Rouge { n, precision: T::zero(), recall: T::zero(), f1: T::zero() };
    }
    Rouge { n, precision, recall, f1: harmonic_mean(precision, recall).unwrap_or_else(T::zero) }
}

/// Mean of per-pair scores; `None` when empty.
pub fn mean_rouge(scores: &[Rouge<f64>]) -> Option<Rouge<f64>> {
    let first = scores.first()?;
    let k = scores.len() as f64;
    Some(Rouge {
        n: first.n,
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / k,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / k,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / k,
    })
}

/// Cosine similarity between the embeddings of a candidate and a reference.
pub fn coherence_score(candidate: &str, reference: &str, provider: &dyn EmbeddingProvider) -> Result<f64, EmbedError> {
    let a = embed(candidate, provider)?;
    let b = embed(reference, provider)?;
    Ok(cosine(a.as_slice(), b.as_slice()).unwrap_or(0.0))
}

/// Dataset-level coherence: the arithmetic mean of pair scores.
pub fn mean_coherence(scores: &[f64]) -> Option<f64> {
    if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }
}
