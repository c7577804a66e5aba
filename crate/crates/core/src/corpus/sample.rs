use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use thiserror::Error;

use super::{Corpus, FieldType, SurveyRecord};
use crate::seed::rng_for;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("requested {requested} records from a corpus of {available}")]
    CorpusTooSmall { requested: usize, available: usize },
    #[error(
        "stratum expects_disease={expects_disease} needs {needed} records but only {available} are available \
         (expected: {available_expected}, unexpected: {available_unexpected})"
    )]
    Shortfall {
        expects_disease: bool,
        needed: usize,
        available: usize,
        available_expected: usize,
        available_unexpected: usize,
    },
}

/// Draws `n` records split evenly between records that expect a disease
/// mention (`⌈n/2⌉`) and records that do not (`⌊n/2⌋`).
///
/// Within a stratum, records are taken round-robin over field types so every
/// available type is covered before any type repeats. Output lists the
/// expected stratum first, then the unexpected one.
pub fn stratified_sample(corpus: &Corpus, n: usize, seed: u64) -> Result<Vec<SurveyRecord>, SampleError> {
    if n > corpus.len() {
        return Err(SampleError::CorpusTooSmall { requested: n, available: corpus.len() });
    }
    let (expected, unexpected): (Vec<&SurveyRecord>, Vec<&SurveyRecord>) =
        corpus.records().iter().partition(|r| r.expects_disease);
    let quotas = [(true, n.div_ceil(2), &expected), (false, n / 2, &unexpected)];
    for (flag, needed, pool) in quotas {
        if pool.len() < needed {
            return Err(SampleError::Shortfall {
                expects_disease: flag,
                needed,
                available: pool.len(),
                available_expected: expected.len(),
                available_unexpected: unexpected.len(),
            });
        }
    }

    let mut rng = rng_for(seed, "stratify");
    let mut sample = Vec::with_capacity(n);
    for (_, quota, pool) in quotas {
        let mut by_type: BTreeMap<FieldType, Vec<&SurveyRecord>> = BTreeMap::new();
        for r in pool.iter() {
            by_type.entry(r.field_type).or_default().push(r);
        }
        let mut queues: Vec<std::vec::IntoIter<&SurveyRecord>> = by_type
            .into_values()
            .map(|mut group| {
                group.shuffle(&mut rng);
                group.into_iter()
            })
            .collect();
        let mut taken = 0;
        while taken < quota {
            for queue in queues.iter_mut() {
                if taken == quota {
                    break;
                }
                if let Some(r) = queue.next() {
                    sample.push(r.clone());
                    taken += 1;
                }
            }
        }
    }
    Ok(sample)
}
