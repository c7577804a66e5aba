use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{char_len, FieldType};

/// One question/answer unit from a survey export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub record_id: String,
    pub question_text: String,
    pub answer_text: String,
    pub field_type: FieldType,
    #[serde(default)]
    pub preceding_questions: Vec<String>,
    #[serde(default)]
    pub expects_disease: bool,
}

impl SurveyRecord {
    /// Text submitted to the NER backend: `question answer`, joined by a
    /// single space. Either part is used alone when the other is empty.
    pub fn annotation_text(&self) -> String {
        match (self.question_text.is_empty(), self.answer_text.is_empty()) {
            (true, _) => self.answer_text.clone(),
            (false, true) => self.question_text.clone(),
            (false, false) => format!("{} {}", self.question_text, self.answer_text),
        }
    }

    /// Character offset of the answer inside [`annotation_text`](Self::annotation_text).
    pub fn answer_offset(&self) -> usize {
        if self.question_text.is_empty() {
            0
        } else if self.answer_text.is_empty() {
            char_len(&self.question_text)
        } else {
            char_len(&self.question_text) + 1
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: unknown field_type {value:?}")]
    UnknownFieldType { line: usize, value: String },
    #[error("line {line}: empty record_id")]
    EmptyId { line: usize },
    #[error("line {line}: duplicate record_id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Knobs for [`ingest_records`].
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// When a record omits `expects_disease`, it is derived as true if the
    /// question contains any of these keywords (case-insensitive).
    pub disease_keywords: Vec<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    record_id: String,
    question_text: String,
    answer_text: String,
    field_type: String,
    #[serde(default)]
    preceding_questions: Vec<String>,
    #[serde(default)]
    expects_disease: Option<bool>,
}

/// Validated, immutable collection of records in input order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<SurveyRecord>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, rejecting empty or duplicate ids.
    pub fn from_records(records: Vec<SurveyRecord>) -> Result<Self, IngestError> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if r.record_id.is_empty() {
                return Err(IngestError::EmptyId { line: i + 1 });
            }
            if index.insert(r.record_id.clone(), i).is_some() {
                return Err(IngestError::DuplicateId { line: i + 1, id: r.record_id.clone() });
            }
        }
        Ok(Corpus { records, index })
    }

    pub fn records(&self) -> &[SurveyRecord] {
        &self.records
    }

    pub fn get(&self, record_id: &str) -> Option<&SurveyRecord> {
        self.index.get(record_id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn field_type_counts(&self) -> BTreeMap<FieldType, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.field_type).or_insert(0) += 1;
        }
        counts
    }
}

/// Reads a line-delimited record file. Blank lines are skipped.
pub fn ingest_records<R: BufRead>(reader: R, options: &IngestOptions) -> Result<Corpus, IngestError> {
    let keywords: Vec<String> = options.disease_keywords.iter().map(|k| k.to_lowercase()).collect();
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::Malformed { line: line_no, detail: e.to_string() })?;
        let field_type = raw
            .field_type
            .parse::<FieldType>()
            .map_err(|value| IngestError::UnknownFieldType { line: line_no, value })?;
        if raw.record_id.is_empty() {
            return Err(IngestError::EmptyId { line: line_no });
        }
        if seen.insert(raw.record_id.clone(), line_no).is_some() {
            return Err(IngestError::DuplicateId { line: line_no, id: raw.record_id });
        }
        let expects_disease = raw.expects_disease.unwrap_or_else(|| {
            let q = raw.question_text.to_lowercase();
            keywords.iter().any(|k| q.contains(k.as_str()))
        });
        records.push(SurveyRecord {
            record_id: raw.record_id,
            question_text: raw.question_text,
            answer_text: raw.answer_text,
            field_type,
            preceding_questions: raw.preceding_questions,
            expects_disease,
        });
    }
    Corpus::from_records(records)
}

/// Writes records in the same line-delimited format `ingest_records` reads.
pub fn write_records<W: Write>(records: &[SurveyRecord], mut writer: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, field_type: &str) -> String {
        format!(
            r#"{{"record_id":"{id}","question_text":"Any conditions?","answer_text":"asthma","field_type":"{field_type}","preceding_questions":[]}}"#
        )
    }

    #[test]
    fn single_binary_record() {
        let corpus = ingest_records(line("r1", "binary").as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.records()[0].field_type, FieldType::Binary);
        assert!(!corpus.records()[0].expects_disease);
    }

    #[test]
    fn duplicate_id_is_named() {
        let input = format!("{}\n{}\n", line("r1", "binary"), line("r1", "slider"));
        let err = ingest_records(input.as_bytes(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(&err, IngestError::DuplicateId { id, line: 2 } if id == "r1"));
        assert!(err.to_string().contains("r1"));
    }

    #[test]
    fn unknown_field_type_names_line() {
        let input = format!("{}\n{}\n", line("r1", "binary"), line("r2", "matrix"));
        let err = ingest_records(input.as_bytes(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::UnknownFieldType { line: 2, ref value } if value == "matrix"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = format!("{}\n\n{{not json\n", line("r1", "binary"));
        let err = ingest_records(input.as_bytes(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::Malformed { line: 3, .. }));
    }

    #[test]
    fn expects_disease_derived_from_keywords_only_when_absent() {
        let input = concat!(
            r#"{"record_id":"a","question_text":"Has a doctor diagnosed any illness?","answer_text":"no","field_type":"descriptive"}"#,
            "\n",
            r#"{"record_id":"b","question_text":"Any illness?","answer_text":"no","field_type":"descriptive","expects_disease":false}"#,
            "\n",
        );
        let options = IngestOptions { disease_keywords: vec!["Illness".into()] };
        let corpus = ingest_records(input.as_bytes(), &options).unwrap();
        assert!(corpus.get("a").unwrap().expects_disease);
        assert!(!corpus.get("b").unwrap().expects_disease);
    }

    #[test]
    fn annotation_text_joins_with_single_space() {
        let mut r =
            ingest_records(line("r1", "binary").as_bytes(), &IngestOptions::default()).unwrap().records()[0].clone();
        assert_eq!(r.annotation_text(), "Any conditions? asthma");
        assert_eq!(r.answer_offset(), 16);
        r.question_text.clear();
        assert_eq!(r.annotation_text(), "asthma");
        assert_eq!(r.answer_offset(), 0);
    }
}
