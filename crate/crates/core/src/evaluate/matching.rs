use thiserror::Error;

use super::metrics::{ConceptAccuracy, ConfusionCounts};
use crate::corpus::{AnnotationSet, NormalizedAnnotation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("records present in predictions but not in gold: {}", .0.join(", "))]
    UnknownRecords(Vec<String>),
}

/// A predicted mention paired with the gold mention at the identical span.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub predicted: NormalizedAnnotation,
    pub gold: NormalizedAnnotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentionMatch {
    pub pairs: Vec<MatchedPair>,
    pub counts: ConfusionCounts,
}

/// Exact-span, one-to-one mention matching.
///
/// Every gold record is scored; a gold record without predictions counts as
/// having none. A record with neither gold nor predicted mentions adds one
/// true negative.
pub fn match_mentions(predicted: &AnnotationSet, gold: &AnnotationSet) -> Result<MentionMatch, MatchError> {
    let unknown: Vec<String> =
        predicted.record_ids().filter(|id| !gold.contains_record(id)).map(str::to_string).collect();
    if !unknown.is_empty() {
        return Err(MatchError::UnknownRecords(unknown));
    }
    let mut counts = ConfusionCounts::default();
    let mut pairs = Vec::new();
    for (record_id, golds) in gold.iter() {
        let preds = predicted.get(record_id);
        if golds.is_empty() && preds.is_empty() {
            counts.tn += 1;
            continue;
        }
        let mut used = vec![false; preds.len()];
        for g in golds {
            let hit = preds.iter().enumerate().find(|(i, p)| !used[*i] && p.span == g.span).map(|(i, _)| i);
            match hit {
                Some(i) => {
                    used[i] = true;
                    counts.tp += 1;
                    pairs.push(MatchedPair { predicted: preds[i].clone(), gold: g.clone() });
                }
                None => counts.fn_ += 1,
            }
        }
        counts.fp += used.iter().filter(|u| !**u).count() as u64;
    }
    Ok(MentionMatch { pairs, counts })
}

/// Pairs whose concept ids are identical, `NONE` matching `NONE`.
pub fn match_concepts<T: Scalar>(pairs: &[MatchedPair]) -> ConceptAccuracy<T> {
    let correct = pairs.iter().filter(|p| p.predicted.concept == p.gold.concept).count() as u64;
    ConceptAccuracy::new(correct, pairs.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationSource, ConceptId, TextSpan};
    use proptest::prelude::*;

    fn ann(record: &str, b: usize, e: usize, concept: &str) -> NormalizedAnnotation {
        NormalizedAnnotation {
            record_id: record.into(),
            span: TextSpan::new(b, e).unwrap(),
            surface: "x".repeat(e - b),
            concept: concept.parse::<ConceptId>().unwrap(),
            confidence: None,
            source: AnnotationSource::Human,
        }
    }

    fn set(anns: &[NormalizedAnnotation], empty: &[&str]) -> AnnotationSet {
        let mut s = AnnotationSet::new();
        s.extend(anns.iter().cloned());
        for id in empty {
            s.ensure_record(id);
        }
        s
    }

    #[test]
    fn exact_span_is_tp() {
        let m = match_mentions(&set(&[ann("r", 5, 11, "NONE")], &[]), &set(&[ann("r", 5, 11, "NONE")], &[])).unwrap();
        assert_eq!(m.counts, ConfusionCounts::new(1, 0, 0, 0));
    }

    #[test]
    fn partial_overlap_is_fp_and_fn() {
        let m = match_mentions(&set(&[ann("r", 0, 6, "NONE")], &[]), &set(&[ann("r", 0, 15, "NONE")], &[])).unwrap();
        assert_eq!(m.counts, ConfusionCounts::new(0, 0, 1, 1));
    }

    #[test]
    fn empty_record_is_tn() {
        let m = match_mentions(&set(&[], &[]), &set(&[], &["r"])).unwrap();
        assert_eq!(m.counts, ConfusionCounts::new(0, 1, 0, 0));
    }

    #[test]
    fn unknown_prediction_record_errors() {
        let err = match_mentions(&set(&[ann("zz", 0, 1, "NONE")], &[]), &set(&[], &["r"])).unwrap_err();
        assert_eq!(err, MatchError::UnknownRecords(vec!["zz".into()]));
    }

    #[test]
    fn duplicate_predictions_match_once() {
        let preds = set(&[ann("r", 0, 3, "NONE"), ann("r", 0, 3, "NONE")], &[]);
        let m = match_mentions(&preds, &set(&[ann("r", 0, 3, "NONE")], &[])).unwrap();
        assert_eq!(m.counts, ConfusionCounts::new(1, 0, 1, 0));
    }

    #[test]
    fn concept_agreement() {
        let pairs = vec![
            MatchedPair { predicted: ann("r", 0, 1, "mesh:D1"), gold: ann("r", 0, 1, "mesh:D1") },
            MatchedPair { predicted: ann("r", 2, 3, "NONE"), gold: ann("r", 2, 3, "NONE") },
            MatchedPair { predicted: ann("r", 4, 5, "mesh:D1"), gold: ann("r", 4, 5, "mesh:D2") },
        ];
        let acc = match_concepts::<f64>(&pairs);
        assert_eq!((acc.correct, acc.total), (2, 3));
        assert!((acc.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(match_concepts::<f64>(&[]).accuracy, None);
    }

    fn spans() -> impl Strategy<Value = Vec<(usize, usize)>> {
        proptest::collection::vec((0usize..20, 1usize..6).prop_map(|(b, l)| (b, b + l)), 0..6)
    }

    proptest! {
        #[test]
        fn totals_are_conserved(records in proptest::collection::vec((spans(), spans()), 1..6)) {
            let mut preds = AnnotationSet::new();
            let mut gold = AnnotationSet::new();
            let (mut n_pred, mut n_gold) = (0u64, 0u64);
            for (i, (p, g)) in records.iter().enumerate() {
                let id = format!("r{i}");
                gold.ensure_record(&id);
                for &(b, e) in p {
                    preds.insert(ann(&id, b, e, "NONE"));
                    n_pred += 1;
                }
                for &(b, e) in g {
                    gold.insert(ann(&id, b, e, "NONE"));
                    n_gold += 1;
                }
            }
            let c = match_mentions(&preds, &gold).unwrap().counts;
            prop_assert_eq!(c.tp + c.fn_, n_gold);
            prop_assert_eq!(c.tp + c.fp, n_pred);
        }
    }
}
