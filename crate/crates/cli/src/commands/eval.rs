use std::collections::BTreeSet;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::Args;
use phenokit::corpus::AnnotationSet;
use phenokit::evaluate::{
    alignment_confusion, alignment_from_records, coherence_score, compute_metrics, match_concepts, match_mentions,
    mean_coherence, mean_rouge, read_verdicts, render_report, rouge_n, AlignmentMetricsRow, ConfusionCounts, CotRow,
    EmbeddingRow, FlagRow, MatchError, NerSummary, RagFsiRow, ReportInputs, Rouge, VerdictRecord, ZeroShotRow, NR,
};
use phenokit::ontology::EmbeddingProvider;
use phenokit::MetricsReport;
use serde::Deserialize;

use super::{load_gold, load_outcomes};
use crate::config::{required, RunConfig};
use crate::error::{CliError, CliResult};
use crate::files::{open_input, sidecar, write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Doccano ground truth.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Verdict file to score, as `[strategy@model=]path`; repeatable. Without
    /// a label, the manifest `run` wrote beside the file supplies it.
    #[arg(long = "verdicts")]
    pub verdicts: Vec<String>,
    /// Generated summaries as `[label=]path`, JSONL of candidate/reference;
    /// repeatable.
    #[arg(long = "summaries")]
    pub summaries: Vec<String>,
    /// `all` or a comma list of table numbers 1-7.
    #[arg(long, default_value = "all")]
    pub tables: String,
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
}

fn parse_tables(text: &str) -> CliResult<BTreeSet<usize>> {
    if text.trim() == "all" {
        return Ok((1..=7).collect());
    }
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(n) if (1..=7).contains(&n) => Ok(n),
            _ => Err(CliError::Usage(format!("bad table {t:?}; expected all or numbers 1-7"))),
        })
        .collect()
}

fn split_label(spec: &str) -> (Option<&str>, &str) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (Some(label), path),
        _ => (None, spec),
    }
}

#[derive(Debug, Clone)]
struct VerdictSet {
    strategy: String,
    model: String,
    path: PathBuf,
    records: Vec<VerdictRecord>,
}

impl VerdictSet {
    fn label(&self) -> String {
        format!("{}@{}", self.strategy, self.model)
    }
}

/// Strategy and model recorded by `run` beside a verdict file.
fn label_from_manifest(verdicts: &Path) -> (String, String) {
    let manifest = sidecar(verdicts, "manifest.json");
    let resolved = fs::read_to_string(manifest)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .map(|v| v["config"]["resolved"].clone())
        .unwrap_or_default();
    let field = |k: &str| resolved[k].as_str().unwrap_or("unknown").to_string();
    (field("strategy"), field("model"))
}

fn load_verdict_set(spec: &str) -> CliResult<VerdictSet> {
    let (label, path) = split_label(spec);
    let path = PathBuf::from(path);
    let records =
        read_verdicts(open_input(&path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let (strategy, model) = match label {
        Some(l) => match l.split_once('@') {
            Some((s, m)) => (s.to_string(), m.to_string()),
            None => (l.to_string(), "unknown".to_string()),
        },
        None => label_from_manifest(&path),
    };
    Ok(VerdictSet { strategy, model, path, records })
}

#[derive(Deserialize)]
struct SummaryPair {
    candidate: String,
    reference: String,
}

struct SummaryScores {
    label: String,
    rouge: Option<Rouge<f64>>,
    coherence: Option<f64>,
}

fn score_summaries(spec: &str, provider: &dyn EmbeddingProvider) -> CliResult<(SummaryScores, PathBuf)> {
    let (label, path) = split_label(spec);
    let path = PathBuf::from(path);
    let mut rouges = Vec::new();
    let mut coherences = Vec::new();
    for (i, line) in open_input(&path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::from_io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: &dyn std::fmt::Display| CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1));
        let pair: SummaryPair = serde_json::from_str(&line).map_err(|e| at(&e))?;
        rouges.push(rouge_n::<f64>(&pair.candidate, &pair.reference, 1).map_err(|e| at(&e))?);
        coherences.push(coherence_score(&pair.candidate, &pair.reference, provider).map_err(|e| at(&e))?);
    }
    let label = label.map(str::to_string).unwrap_or_else(|| provider.name().to_string());
    Ok((SummaryScores { label, rouge: mean_rouge(&rouges), coherence: mean_coherence(&coherences) }, path))
}

fn zero_shot_prompt_type(strategy: &str) -> Option<&'static str> {
    match strategy {
        "zero-shot" | "zero-shot:concept" => Some("Concept vs Concept Prompt"),
        "zero-shot:mention" => Some("Concept vs Mention Prompt"),
        _ => None,
    }
}

fn cot_variant(strategy: &str) -> Option<&'static str> {
    match strategy {
        "cot:none" => Some("No CoT"),
        "cot:simple" => Some("Simple CoT"),
        "cot:strong" => Some("Strong CoT"),
        "cot:hybrid" => Some("Hybrid CoT"),
        _ => None,
    }
}

fn fmt3(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| NR.to_string())
}

pub fn execute(args: &EvalArgs, config: &RunConfig) -> CliResult<()> {
    let tables = parse_tables(&args.tables)?;
    let predictions_path = args.predictions.clone().unwrap_or_else(|| config.predictions_path());
    let gold_path = args.gold.clone().map(Some).unwrap_or_else(|| config.paths.gold.clone());
    let gold_path = required(&gold_path, "gold")?;
    let report_dir = args.report_dir.clone().unwrap_or_else(|| config.output("report"));

    let truth = load_gold(&gold_path)?;
    let outcomes = load_outcomes(&predictions_path)?;
    let mut predicted = AnnotationSet::new();
    let mut mismatched = Vec::new();
    for o in &outcomes {
        predicted.ensure_record(&o.record_id);
        predicted.extend(o.annotations.iter().cloned());
        if truth.texts.get(&o.record_id).is_some_and(|t| *t != o.text) {
            mismatched.push(o.record_id.clone());
        }
    }
    let matched = match_mentions(&predicted, &truth.annotations).map_err(|e| match e {
        MatchError::UnknownRecords(ids) => {
            CliError::Validation(format!("record ids in predictions but not in gold: {}", ids.join(", ")))
        }
    })?;
    if !mismatched.is_empty() {
        return Err(CliError::Validation(format!(
            "prediction text differs from gold text for records: {}",
            mismatched.join(", ")
        )));
    }

    let mut inputs: Vec<PathBuf> = vec![predictions_path.clone(), gold_path.clone()];
    let mut verdict_specs = args.verdicts.clone();
    if verdict_specs.is_empty() {
        if let Some(p) = config.paths.verdicts.clone().filter(|p| p.exists()) {
            verdict_specs.push(p.display().to_string());
        }
    }
    let verdict_sets = verdict_specs.iter().map(|s| load_verdict_set(s)).collect::<CliResult<Vec<_>>>()?;
    inputs.extend(verdict_sets.iter().map(|v| v.path.clone()));
    let provider = config.embedding.build()?;
    let mut summaries = Vec::new();
    for spec in &args.summaries {
        let (scores, path) = score_summaries(spec, provider.as_ref())?;
        summaries.push(scores);
        inputs.push(path);
    }

    let counts = matched.counts;
    let concepts = match_concepts::<f64>(&matched.pairs);
    let mut report = ReportInputs {
        ner: Some(NerSummary { label: config.ner.label.clone().unwrap_or_else(|| "BERN2".into()), counts, concepts }),
        ..ReportInputs::default()
    };
    let gold = &truth.annotations;
    let mut cot_counts: Vec<(String, String, ConfusionCounts)> = Vec::new();
    for set in &verdict_sets {
        let alignment = alignment_from_records::<f64>(&set.records, gold).ok();
        if let Some(prompt_type) = zero_shot_prompt_type(&set.strategy) {
            report.zero_shot.push(ZeroShotRow::from_verdicts(prompt_type, &set.model, &set.records, gold));
        }
        report.fine_tuning.push(AlignmentMetricsRow::from_verdicts(&set.strategy, &set.model, &set.records, gold));
        if set.strategy == "rag-fsi" {
            let summary = summaries.iter().find(|s| s.label == set.label());
            report.rag_fsi.push(RagFsiRow {
                setting: "RAG FSI".into(),
                model: set.model.clone(),
                rouge: summary.and_then(|s| s.rouge),
                coherence: summary.and_then(|s| s.coherence),
                alignment,
            });
        }
        if set.strategy.starts_with("rag-fsi-flags") {
            report.flags.push(FlagRow { configuration: format!("{} {}", set.strategy, set.model), alignment });
        }
        if let Some(variant) = cot_variant(&set.strategy) {
            cot_counts.push((set.model.clone(), variant.to_string(), alignment_confusion(&set.records, gold).1));
        }
    }
    report.cot = cot_counts.iter().map(|(m, v, c)| CotRow::from_counts(m, v, c)).collect();
    report.embeddings = summaries
        .iter()
        .filter(|s| !verdict_sets.iter().any(|v| v.label() == s.label))
        .map(|s| EmbeddingRow { embedding: s.label.clone(), rouge: s.rouge, coherence: s.coherence })
        .collect();

    let rendered = render_report(&report);
    let manifest_path = config.manifest_path("eval");
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut manifest = RunManifest::start("eval", config.seed, config.snapshot(), &input_refs)?;
    manifest.write(&manifest_path)?;
    let mut outputs = Vec::new();
    let md_path = report_dir.join("report.md");
    let markdown: String = {
        let mut md = String::from("# Phenotyping evaluation report\n\nNR = not recorded.\n");
        for (i, t) in rendered.tables.iter().enumerate() {
            if tables.contains(&(i + 1)) {
                md.push('\n');
                md.push_str(&t.to_markdown());
            }
        }
        md
    };
    write_atomic(&md_path, markdown.as_bytes())?;
    outputs.push(md_path);
    for (i, t) in rendered.tables.iter().enumerate() {
        if tables.contains(&(i + 1)) {
            let path = report_dir.join(format!("{}.csv", t.file_stem));
            write_atomic(&path, t.to_csv().as_bytes())?;
            outputs.push(path);
        }
    }
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    manifest.finish(&manifest_path, &output_refs, RunStatus::Complete)?;

    let m: MetricsReport = compute_metrics(&counts);
    println!("mentions: TP {} FP {} FN {} TN {}", counts.tp, counts.fp, counts.fn_, counts.tn);
    println!("precision {}", fmt3(m.precision));
    println!("recall {}", fmt3(m.recall));
    println!("F1 {}", fmt3(m.f1));
    println!("accuracy {}", fmt3(m.accuracy));
    println!("NEN accuracy {} ({}/{})", fmt3(concepts.accuracy), concepts.correct, concepts.total);
    for set in &verdict_sets {
        match alignment_from_records::<f64>(&set.records, gold) {
            Ok(a) => println!(
                "{}: BERN2 alignment {:.3}, GT alignment {:.3}",
                set.label(),
                a.bern2_alignment_accuracy,
                a.gt_alignment_accuracy
            ),
            Err(e) => println!("{}: {e}", set.label()),
        }
    }
    println!("wrote {} tables to {}", outputs.len() - 1, report_dir.display());
    Ok(())
}
