use serde::{Deserialize, Serialize};

use super::BackendError;
use crate::corpus::{char_len, AnnotationSource, ConceptId, NormalizedAnnotation, TextSpan};

pub const DISEASE_OBJ: &str = "disease";
pub const CUI_LESS: &str = "CUI-less";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerResponse {
    pub results: Vec<NerResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NerResult {
    #[serde(default)]
    pub annotations: Vec<WireAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpan {
    pub begin: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireAnnotation {
    pub mention: String,
    pub span: WireSpan,
    pub obj: String,
    #[serde(default)]
    pub id: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
}

/// Parses a response body and checks it has one result per submitted text.
pub fn decode_response(body: &str, expected: usize) -> Result<Vec<NerResult>, BackendError> {
    let response: NerResponse = serde_json::from_str(body).map_err(|e| BackendError::Malformed(e.to_string()))?;
    if response.results.len() != expected {
        return Err(BackendError::Malformed(format!("expected {expected} results, got {}", response.results.len())));
    }
    Ok(response.results)
}

/// Converts one backend result into disease annotations on `submitted_text`.
///
/// Non-disease entries are dropped. The first id that parses as a MeSH
/// concept wins; `CUI-less` or no parseable id yields `NONE`.
pub fn parse_backend_response(
    result: &NerResult,
    record_id: &str,
    submitted_text: &str,
) -> Result<Vec<NormalizedAnnotation>, BackendError> {
    let len = char_len(submitted_text);
    let mut out = Vec::new();
    for entry in result.annotations.iter().filter(|a| a.obj == DISEASE_OBJ) {
        let span = TextSpan::new(entry.span.begin, entry.span.end).filter(|s| s.end <= len).ok_or_else(|| {
            BackendError::Malformed(format!(
                "span ({}, {}) outside text of length {len}",
                entry.span.begin, entry.span.end
            ))
        })?;
        let surface = span.slice(submitted_text).unwrap_or_default();
        if surface != entry.mention {
            return Err(BackendError::Malformed(format!(
                "mention {:?} does not match text {:?} at {span}",
                entry.mention, surface
            )));
        }
        let concept = entry
            .id
            .iter()
            .filter(|id| id.as_str() != CUI_LESS)
            .find_map(|id| id.parse::<ConceptId>().ok().filter(|c| !c.is_none()))
            .unwrap_or(ConceptId::Unnormalized);
        out.push(NormalizedAnnotation {
            record_id: record_id.to_string(),
            span,
            surface: surface.to_string(),
            concept,
            confidence: entry.prob.filter(|p| (0.0..=1.0).contains(p)),
            source: AnnotationSource::NerBackend,
        });
    }
    out.sort_by_key(|a| (a.span.begin, a.span.end));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(mention: &str, begin: usize, end: usize, obj: &str, ids: &[&str]) -> WireAnnotation {
        WireAnnotation {
            mention: mention.into(),
            span: WireSpan { begin, end },
            obj: obj.into(),
            id: ids.iter().map(|s| s.to_string()).collect(),
            prob: None,
        }
    }

    fn parse(entries: Vec<WireAnnotation>, text: &str) -> Result<Vec<NormalizedAnnotation>, BackendError> {
        parse_backend_response(&NerResult { annotations: entries }, "r1", text)
    }

    #[test]
    fn disease_entry_maps_directly() {
        let anns = parse(vec![entry("asthma", 0, 6, "disease", &["mesh:D001249"])], "asthma attack").unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].concept.to_string(), "mesh:D001249");
        assert_eq!(anns[0].source, AnnotationSource::NerBackend);
    }

    #[test]
    fn non_disease_entries_are_dropped() {
        assert!(parse(vec![entry("IL6", 0, 3, "gene", &["NCBIGene:3569"])], "IL6 levels").unwrap().is_empty());
    }

    #[test]
    fn cui_less_becomes_none() {
        let anns = parse(vec![entry("rash", 0, 4, "disease", &["CUI-less"])], "rash").unwrap();
        assert!(anns[0].concept.is_none());
        let anns = parse(vec![entry("rash", 0, 4, "disease", &[])], "rash").unwrap();
        assert!(anns[0].concept.is_none());
    }

    #[test]
    fn first_mesh_id_wins() {
        let anns = parse(
            vec![entry("asthma", 0, 6, "disease", &["CUI-less", "omim:600807", "mesh:D001249", "mesh:D000001"])],
            "asthma",
        )
        .unwrap();
        assert_eq!(anns[0].concept.to_string(), "mesh:D001249");
    }

    #[test]
    fn bad_span_and_mismatched_mention_rejected() {
        assert!(parse(vec![entry("asthma", 0, 60, "disease", &[])], "asthma").is_err());
        assert!(parse(vec![entry("eczema", 0, 6, "disease", &[])], "asthma").is_err());
        assert!(parse(vec![entry("x", 3, 3, "disease", &[])], "asthma").is_err());
    }

    #[test]
    fn decode_checks_alignment() {
        assert!(decode_response(r#"{"results":[{"annotations":[]}]}"#, 2).is_err());
        assert!(decode_response("not json", 1).is_err());
        assert_eq!(decode_response(r#"{"results":[{}]}"#, 1).unwrap().len(), 1);
    }
}
