use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::ConfusionCounts;
use crate::corpus::{AnnotationSet, ConceptId, NormalizedAnnotation, TextSpan};
use crate::orchestrate::{Judgement, LlmVerdict, VerdictKind};
use crate::scalar::Scalar;

/// A verdict detached from its prompt, as stored in verdict files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRecord {
    pub record_id: String,
    pub span: TextSpan,
    pub backend_concept: ConceptId,
    pub kind: VerdictKind,
    pub proposal: Option<ConceptId>,
    pub hallucinated: bool,
}

impl VerdictRecord {
    pub fn new(annotation: &NormalizedAnnotation, verdict: &LlmVerdict) -> Self {
        VerdictRecord {
            record_id: annotation.record_id.clone(),
            span: annotation.span,
            backend_concept: annotation.concept.clone(),
            kind: verdict.kind,
            proposal: verdict.proposal.clone(),
            hallucinated: verdict.hallucinated,
        }
    }

    /// Concept in force after the verdict: the proposal on a disagreement
    /// that carries one, the backend concept otherwise.
    pub fn final_concept(&self) -> &ConceptId {
        match (&self.kind, &self.proposal) {
            (VerdictKind::Disagree, Some(p)) => p,
            _ => &self.backend_concept,
        }
    }

    /// Whether the verdict commits to a concept at all.
    pub fn commits(&self) -> bool {
        matches!(self.kind, VerdictKind::Agree) || (self.kind == VerdictKind::Disagree && self.proposal.is_some())
    }
}

impl From<&Judgement> for VerdictRecord {
    fn from(j: &Judgement) -> Self {
        VerdictRecord::new(&j.annotation, &j.verdict)
    }
}

#[derive(Serialize, Deserialize)]
struct VerdictLine {
    record_id: String,
    span: [usize; 2],
    backend_concept: ConceptId,
    kind: VerdictKind,
    proposal: Option<ConceptId>,
    hallucinated: bool,
}

#[derive(Debug, Error)]
pub enum VerdictIoError {
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_verdicts<W: Write>(verdicts: &[VerdictRecord], mut writer: W) -> io::Result<()> {
    for v in verdicts {
        let line = VerdictLine {
            record_id: v.record_id.clone(),
            span: [v.span.begin, v.span.end],
            backend_concept: v.backend_concept.clone(),
            kind: v.kind,
            proposal: v.proposal.clone(),
            hallucinated: v.hallucinated,
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_verdicts<R: BufRead>(reader: R) -> Result<Vec<VerdictRecord>, VerdictIoError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |detail: String| VerdictIoError::Malformed { line: i + 1, detail };
        let raw: VerdictLine = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let span =
            TextSpan::new(raw.span[0], raw.span[1]).ok_or_else(|| malformed(format!("invalid span {:?}", raw.span)))?;
        if raw.proposal.is_some() && raw.kind != VerdictKind::Disagree {
            return Err(malformed("proposal present on a verdict that is not a disagreement".into()));
        }
        out.push(VerdictRecord {
            record_id: raw.record_id,
            span,
            backend_concept: raw.backend_concept,
            kind: raw.kind,
            proposal: raw.proposal,
            hallucinated: raw.hallucinated,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignmentError {
    #[error("{verdicts} verdicts for {annotations} backend annotations")]
    LengthMismatch { verdicts: usize, annotations: usize },
    #[error("no verdicts to evaluate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport<T> {
    pub bern2_alignment_accuracy: T,
    pub gt_alignment_accuracy: T,
}

/// Gold concept at the verdict's exact span, if a gold mention sits there.
fn gold_concept<'a>(v: &VerdictRecord, gold: &'a AnnotationSet) -> Option<&'a ConceptId> {
    gold.get(&v.record_id).iter().find(|g| g.span == v.span).map(|g| &g.concept)
}

fn judged_correctly(v: &VerdictRecord, gold: Option<&ConceptId>) -> bool {
    let backend_right = gold == Some(&v.backend_concept);
    match v.kind {
        VerdictKind::Agree => backend_right,
        VerdictKind::Disagree => !backend_right,
        VerdictKind::Unparseable => false,
    }
}

fn final_correct(v: &VerdictRecord, gold: Option<&ConceptId>) -> bool {
    v.kind != VerdictKind::Unparseable && gold == Some(v.final_concept())
}

/// Alignment accuracies over stored verdict records.
///
/// A verdict whose span has no gold mention is scored against an absent
/// gold concept, which equals no backend concept.
pub fn alignment_from_records<T: Scalar>(
    verdicts: &[VerdictRecord],
    gold: &AnnotationSet,
) -> Result<AlignmentReport<T>, AlignmentError> {
    if verdicts.is_empty() {
        return Err(AlignmentError::Empty);
    }
    let (mut bern2, mut gt) = (0u64, 0u64);
    for v in verdicts {
        let g = gold_concept(v, gold);
        bern2 += u64::from(judged_correctly(v, g));
        gt += u64::from(final_correct(v, g));
    }
    let total = verdicts.len() as u64;
    Ok(AlignmentReport {
        bern2_alignment_accuracy: T::ratio(bern2, total).unwrap_or_else(T::zero),
        gt_alignment_accuracy: T::ratio(gt, total).unwrap_or_else(T::zero),
    })
}

/// Alignment accuracies for verdicts paired one-to-one with the backend
/// annotations they judge.
pub fn alignment_accuracy<T: Scalar>(
    verdicts: &[LlmVerdict],
    backend: &[NormalizedAnnotation],
    gold: &AnnotationSet,
) -> Result<AlignmentReport<T>, AlignmentError> {
    if verdicts.len() != backend.len() {
        return Err(AlignmentError::LengthMismatch { verdicts: verdicts.len(), annotations: backend.len() });
    }
    let records: Vec<VerdictRecord> = backend.iter().zip(verdicts).map(|(a, v)| VerdictRecord::new(a, v)).collect();
    alignment_from_records(&records, gold)
}

/// Confusion counts behind the alignment F1/P/R/A columns.
///
/// Against the backend: a positive is a backend concept equal to gold, a
/// predicted positive is an agreement; unparseable verdicts count as misses.
/// Against ground truth: a verdict that commits to a concept is TP when that
/// concept is gold and FP otherwise; a non-committal verdict is FN when a
/// gold mention exists at the span and TN otherwise.
pub fn alignment_confusion(verdicts: &[VerdictRecord], gold: &AnnotationSet) -> (ConfusionCounts, ConfusionCounts) {
    let mut bern2 = ConfusionCounts::default();
    let mut gt = ConfusionCounts::default();
    for v in verdicts {
        let g = gold_concept(v, gold);
        let backend_right = g == Some(&v.backend_concept);
        match (v.kind, backend_right) {
            (VerdictKind::Agree, true) => bern2.tp += 1,
            (VerdictKind::Agree, false) => bern2.fp += 1,
            (VerdictKind::Disagree, false) => bern2.tn += 1,
            (VerdictKind::Disagree, true) => bern2.fn_ += 1,
            (VerdictKind::Unparseable, true) => bern2.fn_ += 1,
            (VerdictKind::Unparseable, false) => bern2.fp += 1,
        }
        match (v.commits(), g) {
            (true, Some(g)) if g == v.final_concept() => gt.tp += 1,
            (true, _) => gt.fp += 1,
            (false, Some(_)) => gt.fn_ += 1,
            (false, None) => gt.tn += 1,
        }
    }
    (bern2, gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotationSource;

    fn ann(b: usize, concept: &str) -> NormalizedAnnotation {
        NormalizedAnnotation {
            record_id: "r".into(),
            span: TextSpan::new(b, b + 3).unwrap(),
            surface: "abc".into(),
            concept: concept.parse().unwrap(),
            confidence: None,
            source: AnnotationSource::NerBackend,
        }
    }

    fn gold(concepts: &[&str]) -> AnnotationSet {
        let mut s = AnnotationSet::new();
        s.extend(concepts.iter().enumerate().map(|(i, c)| ann(i * 10, c)));
        s
    }

    #[test]
    fn perfect_agreement() {
        let g = gold(&["mesh:D1", "mesh:D2"]);
        let backend = vec![ann(0, "mesh:D1"), ann(10, "mesh:D2")];
        let verdicts = vec![LlmVerdict::agree("AGREE"), LlmVerdict::agree("AGREE")];
        let r: AlignmentReport<f64> = alignment_accuracy(&verdicts, &backend, &g).unwrap();
        assert_eq!((r.bern2_alignment_accuracy, r.gt_alignment_accuracy), (1.0, 1.0));
    }

    #[test]
    fn four_cases() {
        let g = gold(&["mesh:D1", "mesh:D2", "mesh:D3", "mesh:D4"]);
        let backend = vec![ann(0, "mesh:D1"), ann(10, "mesh:D9"), ann(20, "mesh:D9"), ann(30, "mesh:D4")];
        let verdicts = vec![
            LlmVerdict::agree("AGREE"),
            LlmVerdict::agree("AGREE"),
            LlmVerdict::disagree("DISAGREE mesh:D3", Some("mesh:D3".parse().unwrap())),
            LlmVerdict::unparseable("hmm"),
        ];
        let r: AlignmentReport<f64> = alignment_accuracy(&verdicts, &backend, &g).unwrap();
        assert_eq!((r.bern2_alignment_accuracy, r.gt_alignment_accuracy), (0.5, 0.5));
        let mut reversed_b = backend.clone();
        let mut reversed_v = verdicts.clone();
        reversed_b.reverse();
        reversed_v.reverse();
        assert_eq!(alignment_accuracy::<f64>(&reversed_v, &reversed_b, &g).unwrap(), r);
        let records: Vec<_> = backend.iter().zip(&verdicts).map(|(a, v)| VerdictRecord::new(a, v)).collect();
        let (b, t) = alignment_confusion(&records, &g);
        assert_eq!(b, ConfusionCounts::new(1, 1, 1, 1));
        assert_eq!(t, ConfusionCounts::new(2, 0, 1, 1));
    }

    #[test]
    fn errors() {
        let g = gold(&[]);
        assert_eq!(alignment_accuracy::<f64>(&[], &[], &g), Err(AlignmentError::Empty));
        assert!(matches!(
            alignment_accuracy::<f64>(&[LlmVerdict::agree("")], &[], &g),
            Err(AlignmentError::LengthMismatch { verdicts: 1, annotations: 0 })
        ));
    }

    #[test]
    fn verdict_file_round_trip() {
        let records = vec![
            VerdictRecord::new(&ann(0, "mesh:D1"), &LlmVerdict::agree("AGREE")),
            VerdictRecord::new(&ann(10, "NONE"), &LlmVerdict::disagree("x", Some("mesh:D5".parse().unwrap()))),
        ];
        let mut buf = Vec::new();
        write_verdicts(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"record_id":"r","span":[0,3],"backend_concept":"mesh:D1","kind":"agree","proposal":null,"hallucinated":false}"#));
        assert_eq!(read_verdicts(buf.as_slice()).unwrap(), records);
        let bad = r#"{"record_id":"r","span":[0,3],"backend_concept":"NONE","kind":"agree","proposal":"mesh:D1","hallucinated":false}"#;
        assert!(read_verdicts(bad.as_bytes()).is_err());
    }
}
