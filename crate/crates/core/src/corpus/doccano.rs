//! Doccano sequence-labelling JSONL: `{"record_id", "text", "label": [[b, e, concept]]}`.
//!
//! `record_id` is optional on import; lines without it are keyed by their
//! 1-based line number.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{char_len, AnnotationSet, AnnotationSource, ConceptId, NormalizedAnnotation, TextSpan};

#[derive(Debug, Error)]
pub enum DoccanoError {
    #[error("line {line}: malformed Doccano object: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: span ({begin}, {end}) out of bounds for text of length {len}")]
    SpanOutOfBounds { line: usize, begin: usize, end: usize, len: usize },
    #[error("line {line}: label {label:?} is neither a concept id nor NONE")]
    BadLabel { line: usize, label: String },
    #[error("line {line}: duplicate span ({begin}, {end})")]
    DuplicateSpan { line: usize, begin: usize, end: usize },
    #[error("line {line}: duplicate record_id {id:?}")]
    DuplicateRecord { line: usize, id: String },
    #[error("no text for record {0:?}")]
    MissingText(String),
    #[error("record {record_id:?}: {detail}")]
    InvalidAnnotation { record_id: String, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
struct DoccanoLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    record_id: Option<String>,
    text: String,
    #[serde(default)]
    label: Vec<(usize, usize, String)>,
}

/// Human annotations together with the texts they index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub annotations: AnnotationSet,
    pub texts: BTreeMap<String, String>,
}

pub fn import_doccano<R: BufRead>(reader: R) -> Result<GroundTruth, DoccanoError> {
    let mut truth = GroundTruth::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DoccanoLine = serde_json::from_str(&line)
            .map_err(|e| DoccanoError::Malformed { line: line_no, detail: e.to_string() })?;
        let record_id = parsed.record_id.unwrap_or_else(|| line_no.to_string());
        if truth.texts.contains_key(&record_id) {
            return Err(DoccanoError::DuplicateRecord { line: line_no, id: record_id });
        }
        let len = char_len(&parsed.text);
        truth.annotations.ensure_record(&record_id);
        for (begin, end, label) in parsed.label {
            let span = TextSpan::new(begin, end).filter(|s| s.end <= len).ok_or(DoccanoError::SpanOutOfBounds {
                line: line_no,
                begin,
                end,
                len,
            })?;
            let concept: ConceptId =
                label.parse().map_err(|_| DoccanoError::BadLabel { line: line_no, label: label.clone() })?;
            if truth.annotations.get(&record_id).iter().any(|a| a.span == span) {
                return Err(DoccanoError::DuplicateSpan { line: line_no, begin, end });
            }
            let surface = span.slice(&parsed.text).unwrap_or_default().to_string();
            truth.annotations.insert(NormalizedAnnotation {
                record_id: record_id.clone(),
                span,
                surface,
                concept,
                confidence: None,
                source: AnnotationSource::Human,
            });
        }
        truth.texts.insert(record_id, parsed.text);
    }
    Ok(truth)
}

/// One line per record in `texts` (ascending id), labels in span order.
pub fn export_doccano<W: Write>(
    annotations: &AnnotationSet,
    texts: &BTreeMap<String, String>,
    mut writer: W,
) -> Result<(), DoccanoError> {
    if let Some(missing) = annotations.record_ids().find(|id| !texts.contains_key(*id)) {
        return Err(DoccanoError::MissingText(missing.to_string()));
    }
    for (record_id, text) in texts {
        let mut label = Vec::new();
        for a in annotations.get(record_id) {
            a.validate(text)
                .map_err(|detail| DoccanoError::InvalidAnnotation { record_id: record_id.clone(), detail })?;
            label.push((a.span.begin, a.span.end, a.concept.to_string()));
        }
        let line = DoccanoLine { record_id: Some(record_id.clone()), text: text.clone(), label };
        serde_json::to_writer(&mut writer, &line).map_err(io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
