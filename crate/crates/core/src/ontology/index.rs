use thiserror::Error;

use super::document::retrieval_text;
use super::{embed, EmbedError, EmbeddingProvider, EmbeddingVector, OntologyStore};
use crate::corpus::MeshId;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum CosineError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine undefined for a zero vector")]
    ZeroVector,
}

/// `dot(u, v) / (‖u‖ ‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine<F: Real>(u: &[F], v: &[F]) -> Result<F, CosineError> {
    if u.len() != v.len() {
        return Err(CosineError::DimensionMismatch(u.len(), v.len()));
    }
    let (dot, uu, vv) = u
        .iter()
        .zip(v)
        .fold((F::zero(), F::zero(), F::zero()), |(d, a, b), (x, y)| (d + *x * *y, a + *x * *x, b + *y * *y));
    let denom = (uu * vv).sqrt();
    if denom == F::zero() {
        return Err(CosineError::ZeroVector);
    }
    Ok((dot / denom).max(-F::one()).min(F::one()))
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RetrievalError {
    #[error("k must be positive")]
    ZeroK,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("index built with provider {index:?}, queried with {query:?}")]
    ProviderMismatch { index: String, query: String },
}

/// One embedding per stored concept, built from the concept's document text
/// without its id line.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    provider: String,
    entries: Vec<(MeshId, EmbeddingVector)>,
}

impl VectorIndex {
    pub fn build(store: &OntologyStore, provider: &dyn EmbeddingProvider) -> Result<Self, EmbedError> {
        let texts: Vec<String> = store.concepts().map(retrieval_text).collect();
        let vectors = provider.embed_batch(&texts)?;
        let entries = store.concepts().map(|c| c.concept_id.clone()).zip(vectors).collect();
        Ok(VectorIndex { provider: provider.name().to_string(), entries })
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vector(&self, id: &MeshId) -> Option<&EmbeddingVector> {
        self.entries.iter().find(|(e, _)| e == id).map(|(_, v)| v)
    }

    /// Every concept scored against `query`, best first, ties by ascending id.
    fn ranked(&self, query: &str, provider: &dyn EmbeddingProvider) -> Result<Vec<(MeshId, f64)>, RetrievalError> {
        if provider.name() != self.provider {
            return Err(RetrievalError::ProviderMismatch {
                index: self.provider.clone(),
                query: provider.name().to_string(),
            });
        }
        let q = embed(query, provider)?;
        let mut scored: Vec<(MeshId, f64)> = self
            .entries
            .iter()
            .map(|(id, v)| (id.clone(), cosine(q.as_slice(), v.as_slice()).unwrap_or(0.0)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(scored)
    }

    /// At most `k` concepts by descending cosine similarity to `query`.
    pub fn top_k(
        &self,
        query: &str,
        k: usize,
        provider: &dyn EmbeddingProvider,
    ) -> Result<Vec<(MeshId, f64)>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let mut ranked = self.ranked(query, provider)?;
        ranked.truncate(k);
        Ok(ranked)
    }

    /// RAG retrieval: concepts whose name or synonym exactly matches
    /// `mention` come first, then nearest neighbours of `query`.
    pub fn retrieve(
        &self,
        store: &OntologyStore,
        mention: &str,
        query: &str,
        k: usize,
        provider: &dyn EmbeddingProvider,
    ) -> Result<Vec<(MeshId, f64)>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let ranked = self.ranked(query, provider)?;
        let exact: Vec<&MeshId> = store.lookup_exact(mention).into_iter().map(|c| &c.concept_id).collect();
        let (mut hits, rest): (Vec<_>, Vec<_>) = ranked.into_iter().partition(|(id, _)| exact.contains(&id));
        hits.extend(rest);
        hits.truncate(k);
        Ok(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{HashedBagOfWords, OntologyConcept};

    fn concept(id: &str, name: &str, description: &str, synonyms: &[&str]) -> OntologyConcept {
        OntologyConcept {
            concept_id: MeshId::new(id).unwrap(),
            preferred_name: name.into(),
            description: description.into(),
            synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn store() -> OntologyStore {
        OntologyStore::from_concepts(vec![
            concept("D001249", "Asthma", "Chronic airway inflammation with wheeze.", &["bronchial asthma"]),
            concept("D004485", "Eczema", "Itchy inflamed skin.", &["eczema"]),
            concept("D005334", "Fever", "Raised body temperature.", &["pyrexia"]),
            concept("D000002", "Twin", "Same text.", &[]),
            concept("D000001", "Twin", "Same text.", &[]),
        ])
        .unwrap()
    }

    #[test]
    fn cosine_reference_values() {
        assert!((cosine(&[1.0_f64, 0.0], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0_f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let s = 1.0 / 2f64.sqrt();
        assert!((cosine(&[1.0, 0.0], &[s, s]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((cosine(&[1.0_f32, 0.0], &[1.0, 1.0]).unwrap() - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert_eq!(cosine(&[1.0, 0.0], &[1.0]), Err(CosineError::DimensionMismatch(2, 1)));
    }

    #[test]
    fn name_query_ranks_its_concept_first() {
        let p = HashedBagOfWords::default();
        let index = VectorIndex::build(&store(), &p).unwrap();
        assert_eq!(index.top_k("Fever", 1, &p).unwrap()[0].0.identifier(), "D005334");
    }

    #[test]
    fn k_larger_than_store_returns_everything() {
        let p = HashedBagOfWords::default();
        let index = VectorIndex::build(&store(), &p).unwrap();
        assert_eq!(index.top_k("skin", 50, &p).unwrap().len(), 5);
    }

    #[test]
    fn identical_documents_tie_break_by_id() {
        let p = HashedBagOfWords::default();
        let index = VectorIndex::build(&store(), &p).unwrap();
        let top = index.top_k("Twin same text", 2, &p).unwrap();
        assert_eq!(top[0].1, top[1].1);
        assert_eq!(top[0].0.identifier(), "D000001");
        assert_eq!(top[1].0.identifier(), "D000002");
    }

    #[test]
    fn bad_queries_rejected() {
        let p = HashedBagOfWords::default();
        let index = VectorIndex::build(&store(), &p).unwrap();
        assert_eq!(index.top_k("asthma", 0, &p), Err(RetrievalError::ZeroK));
        assert_eq!(index.top_k("  ", 3, &p), Err(RetrievalError::Embed(EmbedError::Empty)));
        let other = HashedBagOfWords::named("jina");
        assert!(matches!(index.top_k("asthma", 3, &other), Err(RetrievalError::ProviderMismatch { .. })));
    }

    #[test]
    fn exact_synonym_hits_lead_retrieval() {
        let p = HashedBagOfWords::default();
        let s = store();
        let index = VectorIndex::build(&s, &p).unwrap();
        let hits = index.retrieve(&s, "pyrexia", "pyrexia wheeze chronic airway", 2, &p).unwrap();
        assert_eq!(hits[0].0.identifier(), "D005334");
        assert_eq!(hits[1].0.identifier(), "D001249");
    }

    #[test]
    fn rebuild_is_identical() {
        let p = HashedBagOfWords::default();
        let a = VectorIndex::build(&store(), &p).unwrap();
        let b = VectorIndex::build(&store(), &p).unwrap();
        assert_eq!(a.entries, b.entries);
        assert_eq!(a.len(), store().len());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn top_k_is_prefix_of_top_k_plus_one(query in "[a-z]{2,8}( [a-z]{2,8}){0,4}", k in 1usize..6) {
                let p = HashedBagOfWords::default();
                let index = VectorIndex::build(&store(), &p).unwrap();
                let a = index.top_k(&query, k, &p).unwrap();
                let b = index.top_k(&query, k + 1, &p).unwrap();
                prop_assert_eq!(&a[..], &b[..a.len()]);
            }

            #[test]
            fn self_cosine_is_one(text in "[a-zA-Z]{1,10}( [a-zA-Z]{1,10}){0,8}") {
                let v = embed(&text, &HashedBagOfWords::default()).unwrap();
                prop_assert!((cosine(v.as_slice(), v.as_slice()).unwrap() - 1.0).abs() <= 1e-9);
            }
        }
    }
}
