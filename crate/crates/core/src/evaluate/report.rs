use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::alignment::{alignment_confusion, alignment_from_records, AlignmentReport, VerdictRecord};
use super::metrics::{
    compute_metrics, hallucination_rate, normalised_performance, ConceptAccuracy, ConfusionCounts, Metrics,
};
use super::rouge::Rouge;
use crate::corpus::AnnotationSet;

/// Mention- and concept-level scores of the NER backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerSummary {
    pub label: String,
    pub counts: ConfusionCounts,
    pub concepts: ConceptAccuracy<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotRow {
    pub prompt_type: String,
    pub model: String,
    /// Fraction of verdicts that judge the backend correctly.
    pub correct: Option<f64>,
    pub hallucination: Option<f64>,
}

impl ZeroShotRow {
    pub fn from_verdicts(prompt_type: &str, model: &str, verdicts: &[VerdictRecord], gold: &AnnotationSet) -> Self {
        let alignment = alignment_from_records::<f64>(verdicts, gold).ok();
        ZeroShotRow {
            prompt_type: prompt_type.into(),
            model: model.into(),
            correct: alignment.map(|a| a.bern2_alignment_accuracy),
            hallucination: hallucination_rate(verdicts.iter().map(|v| v.hallucinated)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMetricsRow {
    pub setting: String,
    pub model: String,
    pub bern2: ConfusionCounts,
    pub gt: ConfusionCounts,
}

impl AlignmentMetricsRow {
    pub fn from_verdicts(setting: &str, model: &str, verdicts: &[VerdictRecord], gold: &AnnotationSet) -> Self {
        let (bern2, gt) = alignment_confusion(verdicts, gold);
        AlignmentMetricsRow { setting: setting.into(), model: model.into(), bern2, gt }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagFsiRow {
    pub setting: String,
    pub model: String,
    pub rouge: Option<Rouge<f64>>,
    pub coherence: Option<f64>,
    pub alignment: Option<AlignmentReport<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRow {
    pub configuration: String,
    pub alignment: Option<AlignmentReport<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotRow {
    pub model: String,
    pub variant: String,
    /// True-positive rate as a fraction.
    pub true_positive: Option<f64>,
    pub false_negative: Option<f64>,
}

impl CotRow {
    pub fn from_counts(model: &str, variant: &str, counts: &ConfusionCounts) -> Self {
        let m: Metrics<f64> = compute_metrics(counts);
        CotRow { model: model.into(), variant: variant.into(), true_positive: m.recall, false_negative: m.fnr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub embedding: String,
    pub rouge: Option<Rouge<f64>>,
    pub coherence: Option<f64>,
}

/// Everything a report can show; empty sections render as "NR" rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub ner: Option<NerSummary>,
    pub zero_shot: Vec<ZeroShotRow>,
    pub fine_tuning: Vec<AlignmentMetricsRow>,
    pub rag_fsi: Vec<RagFsiRow>,
    pub flags: Vec<FlagRow>,
    pub cot: Vec<CotRow>,
    pub embeddings: Vec<EmbeddingRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Count(u64),
    /// A fraction shown as a percentage with the given decimals.
    Percent(Option<f64>, usize),
    /// A fraction shown as-is with two decimals.
    Fraction(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Num(Cell),
}

impl Value {
    fn text(s: &str) -> Self {
        Value::Text(s.to_string())
    }

    /// Full-precision rendering for CSV.
    pub fn raw(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Num(Cell::Count(n)) => n.to_string(),
            Value::Num(Cell::Percent(Some(v), _)) => (v * 100.0).to_string(),
            Value::Num(Cell::Fraction(Some(v))) => v.to_string(),
            Value::Num(Cell::Percent(None, _) | Cell::Fraction(None)) => NR.to_string(),
        }
    }

    /// Rounded rendering for the markdown report.
    pub fn display(&self) -> String {
        match self {
            Value::Num(Cell::Percent(Some(v), d)) => format!("{:.*}", *d, v * 100.0),
            Value::Num(Cell::Fraction(Some(v))) => format!("{v:.2}"),
            other => other.raw(),
        }
    }
}

pub const NR: &str = "NR";

/// One rendered table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_stem: &'static str,
    pub title: &'static str,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::raw)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "## {}\n\n| {} |\n|{}|\n",
            self.title,
            self.headers.join(" | "),
            vec!["---"; self.headers.len()].join("|")
        );
        if self.rows.is_empty() {
            let mut cells = vec!["(not run)".to_string()];
            cells.extend(std::iter::repeat_n(NR.to_string(), self.headers.len() - 1));
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.display().replace('|', "\\|")).collect();
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        out
    }
}

const T1_HEADERS: [&str; 12] = [
    "Task",
    "NER F1 (%)",
    "NER accuracy (%)",
    "true positive (%)",
    "true negative (%)",
    "false positive (%)",
    "false negative (%)",
    "NEN accuracy (%)",
    "TP",
    "TN",
    "FP",
    "FN",
];
const T2_HEADERS: [&str; 4] = ["Prompt", "Model", "correct answers (%)", "hallucination rate (%)"];
const T3_HEADERS: [&str; 10] = [
    "Setting",
    "Model",
    "BERN2 alignment F1 (%)",
    "BERN2 alignment P (%)",
    "BERN2 alignment R (%)",
    "BERN2 alignment A (%)",
    "GT alignment F1 (%)",
    "GT alignment P (%)",
    "GT alignment R (%)",
    "GT alignment A (%)",
];
const T4_HEADERS: [&str; 8] = [
    "Setting",
    "Model",
    "ROUGE-1 F1",
    "ROUGE-1 P",
    "ROUGE-1 R",
    "Coherence",
    "BERN2 alignment accuracy",
    "GT alignment accuracy",
];
const T5_HEADERS: [&str; 3] = ["Configuration", "BERN2 alignment accuracy", "GT alignment accuracy"];
const T6_HEADERS: [&str; 5] = ["Model", "Variant", "normalised performance", "true positive (%)", "false negative (%)"];
const T7_HEADERS: [&str; 5] = ["Embedding", "ROUGE-1 F1", "ROUGE-1 P", "ROUGE-1 R", "coherence"];

fn pct(v: Option<f64>) -> Value {
    Value::Num(Cell::Percent(v, 2))
}

fn frac(v: Option<f64>) -> Value {
    Value::Num(Cell::Fraction(v))
}

fn rouge_cells(r: &Option<Rouge<f64>>) -> [Value; 3] {
    [frac(r.map(|r| r.f1)), frac(r.map(|r| r.precision)), frac(r.map(|r| r.recall))]
}

fn metric_cells(c: &ConfusionCounts) -> [Value; 4] {
    let m: Metrics<f64> = compute_metrics(c);
    [pct(m.f1), pct(m.precision), pct(m.recall), pct(m.accuracy)]
}

fn table1(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .ner
        .iter()
        .map(|s| {
            let m: Metrics<f64> = compute_metrics(&s.counts);
            let p1 = |v| Value::Num(Cell::Percent(v, 1));
            vec![
                Value::text(&s.label),
                p1(m.f1),
                p1(m.accuracy),
                p1(m.recall),
                p1(m.tnr),
                p1(m.fpr),
                p1(m.fnr),
                p1(s.concepts.accuracy),
                Value::Num(Cell::Count(s.counts.tp)),
                Value::Num(Cell::Count(s.counts.tn)),
                Value::Num(Cell::Count(s.counts.fp)),
                Value::Num(Cell::Count(s.counts.fn_)),
            ]
        })
        .collect();
    Table {
        file_stem: "table1_ner_nen",
        title: "Table 1: NER and NEN against ground truth",
        headers: T1_HEADERS.to_vec(),
        rows,
    }
}

fn table2(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .zero_shot
        .iter()
        .map(|r| vec![Value::text(&r.prompt_type), Value::text(&r.model), pct(r.correct), pct(r.hallucination)])
        .collect();
    Table { file_stem: "table2_zero_shot", title: "Table 2: Zero-shot prompting", headers: T2_HEADERS.to_vec(), rows }
}

fn table3(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .fine_tuning
        .iter()
        .map(|r| {
            let mut row = vec![Value::text(&r.setting), Value::text(&r.model)];
            row.extend(metric_cells(&r.bern2));
            row.extend(metric_cells(&r.gt));
            row
        })
        .collect();
    Table {
        file_stem: "table3_fine_tuning",
        title: "Table 3: Model performance after fine-tuning",
        headers: T3_HEADERS.to_vec(),
        rows,
    }
}

fn table4(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .rag_fsi
        .iter()
        .map(|r| {
            let mut row = vec![Value::text(&r.setting), Value::text(&r.model)];
            row.extend(rouge_cells(&r.rouge));
            row.push(frac(r.coherence));
            row.push(frac(r.alignment.map(|a| a.bern2_alignment_accuracy)));
            row.push(frac(r.alignment.map(|a| a.gt_alignment_accuracy)));
            row
        })
        .collect();
    Table {
        file_stem: "table4_rag_fsi",
        title: "Table 4: Few-shot inference with retrieval-augmented generation",
        headers: T4_HEADERS.to_vec(),
        rows,
    }
}

fn table5(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .flags
        .iter()
        .map(|r| {
            vec![
                Value::text(&r.configuration),
                frac(r.alignment.map(|a| a.bern2_alignment_accuracy)),
                frac(r.alignment.map(|a| a.gt_alignment_accuracy)),
            ]
        })
        .collect();
    Table {
        file_stem: "table5_binary_flags",
        title: "Table 5: RAG few-shot inference with binary flags",
        headers: T5_HEADERS.to_vec(),
        rows,
    }
}

fn table6(inputs: &ReportInputs) -> Table {
    let present: Vec<(String, f64)> =
        inputs.cot.iter().enumerate().filter_map(|(i, r)| r.true_positive.map(|v| (i.to_string(), v))).collect();
    let normalised = normalised_performance(&present).unwrap_or_default();
    let rows = inputs
        .cot
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let norm = normalised.iter().find(|(l, _)| *l == i.to_string()).map(|(_, v)| *v);
            vec![
                Value::text(&r.model),
                Value::text(&r.variant),
                frac(norm),
                pct(r.true_positive),
                pct(r.false_negative),
            ]
        })
        .collect();
    Table { file_stem: "table6_cot", title: "Table 6: Chain-of-thought prompting", headers: T6_HEADERS.to_vec(), rows }
}

fn table7(inputs: &ReportInputs) -> Table {
    let rows = inputs
        .embeddings
        .iter()
        .map(|r| {
            let mut row = vec![Value::text(&r.embedding)];
            row.extend(rouge_cells(&r.rouge));
            row.push(frac(r.coherence));
            row
        })
        .collect();
    Table { file_stem: "table7_embeddings", title: "Table 7: Embeddings", headers: T7_HEADERS.to_vec(), rows }
}

/// The markdown report and its seven tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    pub tables: Vec<Table>,
}

impl Report {
    /// Writes `report.md` and one CSV per table into `dir`, returning the
    /// paths written.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let md = dir.join("report.md");
        fs::write(&md, &self.markdown)?;
        written.push(md);
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.file_stem));
            fs::write(&path, t.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn render_report(inputs: &ReportInputs) -> Report {
    let tables = vec![
        table1(inputs),
        table2(inputs),
        table3(inputs),
        table4(inputs),
        table5(inputs),
        table6(inputs),
        table7(inputs),
    ];
    let mut markdown = String::from(
        "# Phenotyping evaluation report\n\nNR = not recorded. Mention spans index the question and answer joined by one space.\n",
    );
    for t in &tables {
        markdown.push('\n');
        markdown.push_str(&t.to_markdown());
    }
    Report { markdown, tables }
}
