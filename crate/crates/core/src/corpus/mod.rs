//! Survey records, annotation types, text normalization and Doccano I/O.
//!
//! All offsets are counted in Unicode scalar values (`char`s), never bytes.

mod doccano;
mod normalize;
mod records;
mod sample;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use doccano::{export_doccano, import_doccano, DoccanoError, GroundTruth};
pub use normalize::{load_acronym_map, load_lexicon, normalize_text, NormalizeStep, NormalizedText, PreprocessConfig};
pub use records::{ingest_records, write_records, Corpus, IngestError, IngestOptions, SurveyRecord};
pub use sample::{stratified_sample, SampleError};

/// Survey field kinds found in REDCap exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Slider,
    Descriptive,
    Binary,
    Ratio,
    Dropdown,
    Checkbox,
}

impl FieldType {
    pub const ALL: [FieldType; 6] = [
        FieldType::Slider,
        FieldType::Descriptive,
        FieldType::Binary,
        FieldType::Ratio,
        FieldType::Dropdown,
        FieldType::Checkbox,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldType::Slider => "slider",
            FieldType::Descriptive => "descriptive",
            FieldType::Binary => "binary",
            FieldType::Ratio => "ratio",
            FieldType::Dropdown => "dropdown",
            FieldType::Checkbox => "checkbox",
        }
    }
}

impl FromStr for FieldType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldType::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| s.to_string())
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Half-open character span `[begin, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpan")]
pub struct TextSpan {
    pub begin: usize,
    pub end: usize,
}

#[derive(Deserialize)]
struct RawSpan {
    begin: usize,
    end: usize,
}

impl TryFrom<RawSpan> for TextSpan {
    type Error = String;

    fn try_from(raw: RawSpan) -> Result<Self, Self::Error> {
        TextSpan::new(raw.begin, raw.end).ok_or_else(|| format!("invalid span ({}, {})", raw.begin, raw.end))
    }
}

impl TextSpan {
    /// `None` unless `begin < end`.
    pub fn new(begin: usize, end: usize) -> Option<Self> {
        (begin < end).then_some(TextSpan { begin, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.begin == self.end
    }

    pub fn overlaps(&self, other: &TextSpan) -> bool {
        self.begin < other.end && other.begin < self.end
    }

    /// The substring this span selects, if it lies within `text`.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        char_slice(text, self.begin, self.end)
    }
}

impl fmt::Display for TextSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.begin, self.end)
    }
}

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Substring by character offsets; `None` when out of bounds or inverted.
pub fn char_slice(text: &str, begin: usize, end: usize) -> Option<&str> {
    if begin > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let start = indices.nth(begin)?;
    let stop = if end == begin { start } else { indices.nth(end - begin - 1)? };
    Some(&text[start..stop])
}

/// A MeSH descriptor identifier such as `D001249`, stored without namespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeshId(String);

impl MeshId {
    /// Accepts `D` followed by one or more ASCII digits.
    pub fn new(identifier: &str) -> Option<Self> {
        let digits = identifier.strip_prefix('D')?;
        (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())).then(|| MeshId(identifier.to_string()))
    }

    pub fn identifier(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MeshId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mesh:{}", self.0)
    }
}

impl FromStr for MeshId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<ConceptId>()? {
            ConceptId::Mesh(id) => Ok(id),
            ConceptId::Unnormalized => Err("NONE is not a concept identifier".to_string()),
        }
    }
}

impl Serialize for MeshId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MeshId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ontology concept assigned to a mention, or `NONE` when unnormalized.
///
/// Canonical rendering is `mesh:D<digits>` or `NONE`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptId {
    Mesh(MeshId),
    Unnormalized,
}

impl ConceptId {
    pub const NONE_LABEL: &'static str = "NONE";

    pub fn mesh(&self) -> Option<&MeshId> {
        match self {
            ConceptId::Mesh(id) => Some(id),
            ConceptId::Unnormalized => None,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ConceptId::Unnormalized)
    }
}

impl From<MeshId> for ConceptId {
    fn from(id: MeshId) -> Self {
        ConceptId::Mesh(id)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptId::Mesh(id) => id.fmt(f),
            ConceptId::Unnormalized => f.write_str(Self::NONE_LABEL),
        }
    }
}

impl FromStr for ConceptId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == Self::NONE_LABEL {
            return Ok(ConceptId::Unnormalized);
        }
        s.strip_prefix("mesh:")
            .and_then(MeshId::new)
            .map(ConceptId::Mesh)
            .ok_or_else(|| format!("not a concept id: {s:?}"))
    }
}

impl Serialize for ConceptId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConceptId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationSource {
    NerBackend,
    Llm,
    Human,
}

/// A disease mention with its (possibly absent) ontology concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedAnnotation {
    pub record_id: String,
    pub span: TextSpan,
    pub surface: String,
    pub concept: ConceptId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub source: AnnotationSource,
}

impl NormalizedAnnotation {
    /// Checks the surface/span and confidence invariants against `text`.
    pub fn validate(&self, text: &str) -> Result<(), String> {
        match self.span.slice(text) {
            None => Err(format!("span {} outside text of length {}", self.span, char_len(text))),
            Some(s) if s != self.surface => {
                Err(format!("surface {:?} does not match text {:?} at {}", self.surface, s, self.span))
            }
            Some(_) => match self.confidence {
                Some(c) if !(0.0..=1.0).contains(&c) => Err(format!("confidence {c} outside [0, 1]")),
                _ => Ok(()),
            },
        }
    }
}

/// Annotations keyed by record, each list sorted by `(begin, end)`.
///
/// A record may be present with an empty list, which marks it as annotated
/// with no mentions (a negative record).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    by_record: BTreeMap<String, Vec<NormalizedAnnotation>>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `record_id` without adding annotations.
    pub fn ensure_record(&mut self, record_id: &str) {
        self.by_record.entry(record_id.to_string()).or_default();
    }

    pub fn insert(&mut self, annotation: NormalizedAnnotation) {
        let list = self.by_record.entry(annotation.record_id.clone()).or_default();
        let key = (annotation.span.begin, annotation.span.end);
        let at = list.partition_point(|a| (a.span.begin, a.span.end) <= key);
        list.insert(at, annotation);
    }

    pub fn extend<I: IntoIterator<Item = NormalizedAnnotation>>(&mut self, annotations: I) {
        for a in annotations {
            self.insert(a);
        }
    }

    pub fn contains_record(&self, record_id: &str) -> bool {
        self.by_record.contains_key(record_id)
    }

    /// Annotations for a record; empty when the record is unknown.
    pub fn get(&self, record_id: &str) -> &[NormalizedAnnotation] {
        self.by_record.get(record_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn record_ids(&self) -> impl Iterator<Item = &str> {
        self.by_record.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[NormalizedAnnotation])> {
        self.by_record.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// All annotations in record-id order, then span order.
    pub fn annotations(&self) -> impl Iterator<Item = &NormalizedAnnotation> {
        self.by_record.values().flatten()
    }

    pub fn record_count(&self) -> usize {
        self.by_record.len()
    }

    pub fn annotation_count(&self) -> usize {
        self.by_record.values().map(Vec::len).sum()
    }

    /// First pair of annotations in one record sharing an identical span.
    pub fn duplicate_span(&self) -> Option<(&str, TextSpan)> {
        self.by_record
            .iter()
            .find_map(|(id, list)| list.windows(2).find(|w| w[0].span == w[1].span).map(|w| (id.as_str(), w[0].span)))
    }
}
