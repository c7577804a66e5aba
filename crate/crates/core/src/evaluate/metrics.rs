use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{harmonic_mean, Scalar};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts::new(self.tp + o.tp, self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

/// Confusion-derived rates; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub recall: Option<T>,
    pub fpr: Option<T>,
    pub tnr: Option<T>,
    pub fnr: Option<T>,
    pub precision: Option<T>,
    pub f1: Option<T>,
    pub accuracy: Option<T>,
}

pub fn compute_metrics<T: Scalar>(c: &ConfusionCounts) -> Metrics<T> {
    let recall = T::ratio(c.tp, c.tp + c.fn_);
    let precision = T::ratio(c.tp, c.tp + c.fp);
    Metrics {
        recall,
        fpr: T::ratio(c.fp, c.tn + c.fp),
        tnr: T::ratio(c.tn, c.tn + c.fp),
        fnr: T::ratio(c.fn_, c.tp + c.fn_),
        precision,
        f1: precision.zip(recall).and_then(|(p, r)| harmonic_mean(p, r)),
        accuracy: T::ratio(c.tp + c.tn, c.total()),
    }
}

/// Concept agreement over matched mention pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptAccuracy<T> {
    pub correct: u64,
    pub total: u64,
    pub accuracy: Option<T>,
}

impl<T: Scalar> ConceptAccuracy<T> {
    pub fn new(correct: u64, total: u64) -> Self {
        ConceptAccuracy { correct, total, accuracy: T::ratio(correct, total) }
    }
}

/// Fraction of flagged items; `None` for empty input.
pub fn hallucination_rate<T: Scalar, I: IntoIterator<Item = bool>>(flags: I) -> Option<T> {
    let (mut flagged, mut total) = (0u64, 0u64);
    for f in flags {
        total += 1;
        flagged += u64::from(f);
    }
    T::ratio(flagged, total)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormaliseError {
    #[error("no values to normalise")]
    Empty,
    #[error("every value is zero or negative; nothing to normalise against")]
    NoPositive,
}

/// Divides each value by the maximum over the whole group, so the best
/// variant maps to exactly one.
pub fn normalised_performance<T: Scalar>(values: &[(String, T)]) -> Result<Vec<(String, T)>, NormaliseError> {
    let max = values
        .iter()
        .map(|(_, v)| *v)
        .fold(None, |acc: Option<T>, v| match acc {
            Some(m) if m >= v => Some(m),
            _ => Some(v),
        })
        .ok_or(NormaliseError::Empty)?;
    if max <= T::zero() {
        return Err(NormaliseError::NoPositive);
    }
    Ok(values.iter().map(|(label, v)| (label.clone(), *v / max)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    #[test]
    fn balanced_counts() {
        let m: Metrics<f64> = compute_metrics(&ConfusionCounts::new(8, 8, 2, 2));
        for v in [m.precision, m.recall, m.f1, m.accuracy] {
            assert!((v.unwrap() - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_denominators_absent() {
        let m: Metrics<f64> = compute_metrics(&ConfusionCounts::new(0, 5, 0, 0));
        assert_eq!((m.precision, m.recall, m.f1, m.fnr), (None, None, None, None));
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(compute_metrics::<f64>(&ConfusionCounts::default()).accuracy, None);
    }

    #[test]
    fn single_positive() {
        let m: Metrics<Rational64> = compute_metrics(&ConfusionCounts::new(1, 0, 0, 0));
        let one = Rational64::from_integer(1);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (Some(one), Some(one), Some(one), Some(one)));
        assert_eq!(m.tnr, None);
    }

    #[test]
    fn concept_accuracy_and_hallucination() {
        assert!((ConceptAccuracy::<f64>::new(2, 3).accuracy.unwrap() - 0.6667).abs() < 1e-4);
        assert_eq!(ConceptAccuracy::<f64>::new(0, 0).accuracy, None);
        let flags = (0..10).map(|i| i < 2);
        assert_eq!(hallucination_rate::<f64, _>(flags), Some(0.2));
        assert_eq!(hallucination_rate::<f64, _>([false; 4]), Some(0.0));
        assert_eq!(hallucination_rate::<f64, _>(Vec::new()), None);
    }

    #[test]
    fn normalise_small_groups() {
        let out = normalised_performance(&[("a".to_string(), 50.0), ("b".to_string(), 100.0)]).unwrap();
        assert_eq!(out, vec![("a".to_string(), 0.5), ("b".to_string(), 1.0)]);
        assert_eq!(normalised_performance(&[("x".to_string(), 7.0)]).unwrap()[0].1, 1.0);
        assert_eq!(normalised_performance(&[("x".to_string(), 0.0)]), Err(NormaliseError::NoPositive));
        assert_eq!(normalised_performance::<f64>(&[]), Err(NormaliseError::Empty));
    }

    proptest! {
        #[test]
        fn exact_identities(tp in 0u64..500, tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
            let m: Metrics<Rational64> = compute_metrics(&ConfusionCounts::new(tp, tn, fp, fn_));
            let one = Rational64::from_integer(1);
            if let (Some(r), Some(f)) = (m.recall, m.fnr) {
                prop_assert_eq!(r + f, one);
            }
            if let (Some(t), Some(f)) = (m.tnr, m.fpr) {
                prop_assert_eq!(t + f, one);
            }
            if let (Some(p), Some(r)) = (m.precision, m.recall) {
                if p + r != Rational64::from_integer(0) {
                    prop_assert_eq!(m.f1.unwrap(), Rational64::from_integer(2) * p * r / (p + r));
                }
            }
        }

        #[test]
        fn normalise_is_scale_invariant(values in proptest::collection::vec(1u32..10_000, 1..10), c in 1u32..50) {
            let base: Vec<(String, Rational64)> =
                values.iter().enumerate().map(|(i, v)| (i.to_string(), Rational64::from_integer(i64::from(*v)))).collect();
            let scaled: Vec<(String, Rational64)> =
                base.iter().map(|(l, v)| (l.clone(), *v * Rational64::from_integer(i64::from(c)))).collect();
            let a = normalised_performance(&base).unwrap();
            prop_assert_eq!(&a, &normalised_performance(&scaled).unwrap());
            prop_assert_eq!(a.iter().map(|(_, v)| *v).max().unwrap(), Rational64::from_integer(1));
        }
    }
}
