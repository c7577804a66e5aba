use std::time::Duration;

use super::{
    decode_response, parse_backend_response, AnnotationOutcome, BackendConfig, BackendError, NerBackend, NerRequest,
    NerResult,
};
use crate::concurrency::ordered_parallel_map;
use crate::corpus::SurveyRecord;

/// Annotates `records` in chunks of `batch_size`, with at most
/// `max_inflight` requests outstanding.
///
/// Every record yields exactly one outcome, in input order. When a
/// multi-record request fails, its records are resubmitted one by one so a
/// single bad record cannot take down its neighbours; each single-record
/// request gets `retry_budget` retries on retryable errors.
pub fn annotate_batch(
    records: &[SurveyRecord],
    backend: &dyn NerBackend,
    config: &BackendConfig,
) -> Vec<AnnotationOutcome> {
    if records.is_empty() {
        return Vec::new();
    }
    let batch_size = config.batch_size.max(1);
    let chunks: Vec<&[SurveyRecord]> = records.chunks(batch_size).collect();
    ordered_parallel_map(&chunks, config.max_inflight.max(1), |_, chunk| annotate_chunk(chunk, backend, config))
        .into_iter()
        .flatten()
        .collect()
}

fn annotate_chunk(chunk: &[SurveyRecord], backend: &dyn NerBackend, config: &BackendConfig) -> Vec<AnnotationOutcome> {
    if chunk.len() == 1 {
        return vec![annotate_single(&chunk[0], backend, config)];
    }
    let texts: Vec<String> = chunk.iter().map(SurveyRecord::annotation_text).collect();
    let request = NerRequest { texts: texts.clone() };
    match backend.submit(&request).and_then(|body| decode_response(&body, chunk.len())) {
        Ok(results) => chunk
            .iter()
            .zip(texts)
            .zip(&results)
            .map(|((record, text), result)| outcome_from_result(record, text, result))
            .collect(),
        Err(_) => chunk.iter().map(|r| annotate_single(r, backend, config)).collect(),
    }
}

fn annotate_single(record: &SurveyRecord, backend: &dyn NerBackend, config: &BackendConfig) -> AnnotationOutcome {
    let text = record.annotation_text();
    let request = NerRequest { texts: vec![text.clone()] };
    let mut attempt = 0u32;
    loop {
        match backend.submit(&request).and_then(|body| decode_response(&body, 1)) {
            Ok(results) => return outcome_from_result(record, text, &results[0]),
            Err(e) if e.is_retryable() && attempt < config.retry_budget => {
                attempt += 1;
                if config.backoff_ms > 0 {
                    std::thread::sleep(Duration::from_millis(config.backoff_ms * u64::from(attempt)));
                }
            }
            Err(e) => {
                let reason = match e {
                    BackendError::Malformed(_) => e.to_string(),
                    _ => format!("{e} (after {attempt} retries)"),
                };
                return AnnotationOutcome::failed(record.record_id.clone(), text, reason);
            }
        }
    }
}

fn outcome_from_result(record: &SurveyRecord, text: String, result: &NerResult) -> AnnotationOutcome {
    match parse_backend_response(result, &record.record_id, &text) {
        Ok(annotations) => AnnotationOutcome::ok(record.record_id.clone(), text, annotations),
        Err(e) => AnnotationOutcome::failed(record.record_id.clone(), text, e.to_string()),
    }
}
