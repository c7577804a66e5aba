//! Acceptance gate. Each criterion prints one pass/fail line; the process
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use phenokit::corpus::{export_doccano, import_doccano, AnnotationSet, AnnotationSource};
use phenokit::evaluate::{
    compute_metrics, match_mentions, normalised_performance, render_report, rouge_n_tokens, ConceptAccuracy,
    ConfusionCounts, NerSummary, ReportInputs,
};
use phenokit::ontology::{
    build_rag_document, load_ontology, EmbeddingProvider, HashedBagOfWords, OntologyStore, VectorIndex,
};
use phenokit::orchestrate::{
    build_prompt, build_raft_dataset, parse_verdict, write_raft_dataset, FewShotExample, PromptContext, PromptSpec,
    RaftQuestion, Retrieval, Strategy, TemplateRegistry, VerdictKind,
};
use phenokit::{ConceptId, FieldType, MeshId, NormalizedAnnotation, Rational64, SurveyRecord, TextSpan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    }};
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ontology() -> OntologyStore {
    load_ontology(fs::read(fixtures().join("ontology.jsonl")).unwrap().as_slice()).unwrap()
}

fn normalised_performance_column() -> Outcome {
    let published = [82.60, 81.10, 79.50, 72.00, 58.30, 67.40, 75.00, 68.20];
    let expected = ["1.00", "0.98", "0.96", "0.87", "0.71", "0.82", "0.91", "0.83"];
    let input: Vec<(String, f64)> = published.iter().enumerate().map(|(i, v)| (i.to_string(), *v)).collect();
    let out = normalised_performance(&input).map_err(|e| e.to_string())?;
    ensure!(out.len() == expected.len(), "{} values returned", out.len());
    for ((label, v), want) in out.iter().zip(expected) {
        let got = format!("{v:.2}");
        ensure!(got == want, "row {label}: {got} != {want}");
    }
    Ok(())
}

fn rat(num: u64, den: u64) -> Option<Rational64> {
    (den != 0).then(|| Rational64::new(num as i64, den as i64))
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let c = ConfusionCounts::new(
            rng.gen_range(0..40),
            rng.gen_range(0..40),
            rng.gen_range(0..40),
            rng.gen_range(0..40),
        );
        let m = compute_metrics::<f64>(&c);
        let recall = rat(c.tp, c.tp + c.fn_);
        let precision = rat(c.tp, c.tp + c.fp);
        let tnr = rat(c.tn, c.tn + c.fp);
        ensure!(m.recall.is_some() == recall.is_some(), "case {i}: recall definedness");
        ensure!(m.precision.is_some() == precision.is_some(), "case {i}: precision definedness");
        ensure!(m.tnr.is_some() == tnr.is_some(), "case {i}: tnr definedness");
        if let (Some(r), Some(f)) = (m.recall, m.fnr) {
            ensure!((r + f - 1.0).abs() <= 1e-12, "case {i}: recall+fnr = {}", r + f);
        }
        if let (Some(t), Some(f)) = (m.tnr, m.fpr) {
            ensure!((t + f - 1.0).abs() <= 1e-12, "case {i}: tnr+fpr = {}", t + f);
        }
        if let (Some(p), Some(r)) = (precision, recall) {
            let hm = (p + r != Rational64::from_integer(0)).then(|| Rational64::from_integer(2) * p * r / (p + r));
            match (hm, m.f1) {
                (Some(want), Some(got)) => {
                    ensure!((to_f64(want) - got).abs() <= 1e-12, "case {i}: f1 {got} vs {}", to_f64(want))
                }
                (None, None) => {}
                (want, got) => return Err(format!("case {i}: f1 {got:?} vs harmonic mean {want:?}")),
            }
            let exact = compute_metrics::<Rational64>(&c);
            ensure!(exact.f1 == hm, "case {i}: exact f1 {:?} vs {hm:?}", exact.f1);
        }
    }
    Ok(())
}

fn human(record: &str, text: &str, begin: usize, end: usize, source: AnnotationSource) -> NormalizedAnnotation {
    let span = TextSpan::new(begin, end).unwrap();
    NormalizedAnnotation {
        record_id: record.into(),
        span,
        surface: span.slice(text).unwrap().to_string(),
        concept: "mesh:D001249".parse().unwrap(),
        confidence: None,
        source,
    }
}

fn single(ann: NormalizedAnnotation) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    set.insert(ann);
    set
}

fn mention_strictness() -> Outcome {
    let text = "asthma episodes at night";
    let pred = single(human("r", text, 0, 6, AnnotationSource::NerBackend));
    let gold = single(human("r", text, 0, 15, AnnotationSource::Human));
    let c = match_mentions(&pred, &gold).map_err(|e| e.to_string())?.counts;
    ensure!((c.tp, c.fp, c.fn_) == (0, 1, 1), "asthma vs asthma episodes gave {c:?}");

    let text = "abcdefghijklmnopqrstuvwxyz0123";
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draw = |rng: &mut ChaCha8Rng| {
        let b = rng.gen_range(0..8);
        (b, rng.gen_range(b + 1..=b + 4))
    };
    for i in 0..500 {
        let (pb, pe) = draw(&mut rng);
        let (gb, ge) = draw(&mut rng);
        let pred = single(human("r", text, pb, pe, AnnotationSource::NerBackend));
        let gold = single(human("r", text, gb, ge, AnnotationSource::Human));
        let c = match_mentions(&pred, &gold).map_err(|e| e.to_string())?.counts;
        let identical = (pb, pe) == (gb, ge);
        let want = if identical { (1, 0, 0) } else { (0, 1, 1) };
        ensure!((c.tp, c.fp, c.fn_) == want, "pair {i} ({pb},{pe}) vs ({gb},{ge}) gave {c:?}");
    }
    Ok(())
}

/// Nested-loop clipped n-gram overlap.
fn brute_rouge(cand: &[String], reference: &[String], n: usize) -> (Rational64, Rational64, Rational64) {
    let zero = Rational64::from_integer(0);
    let grams = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < n {
            Vec::new()
        } else {
            (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
        }
    };
    let c = grams(cand);
    let r = grams(reference);
    if c.is_empty() || r.is_empty() {
        return (zero, zero, zero);
    }
    let mut used = vec![false; r.len()];
    let mut overlap = 0i64;
    for g in &c {
        for (j, h) in r.iter().enumerate() {
            if !used[j] && g == h {
                used[j] = true;
                overlap += 1;
                break;
            }
        }
    }
    let p = Rational64::new(overlap, c.len() as i64);
    let rc = Rational64::new(overlap, r.len() as i64);
    let f = if p + rc == zero { zero } else { Rational64::from_integer(2) * p * rc / (p + rc) };
    (p, rc, f)
}

fn rouge_oracle() -> Outcome {
    let vocab = ["the", "child", "has", "asthma", "and", "eczema", "no"];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seq = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let len = rng.gen_range(0..=12);
        (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())].to_string()).collect()
    };
    for i in 0..200 {
        let cand = seq(&mut rng);
        let reference = seq(&mut rng);
        for n in [1, 2] {
            let got = rouge_n_tokens::<Rational64>(&cand, &reference, n);
            let want = brute_rouge(&cand, &reference, n);
            ensure!(
                (got.precision, got.recall, got.f1) == want,
                "sequence {i}, n={n}: {got:?} vs {want:?} for {cand:?} / {reference:?}"
            );
        }
    }
    Ok(())
}

fn run_cli(out: &Path, args: &[&str]) -> Result<String, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_phenokit"))
        .arg("--config")
        .arg(fixtures().join("config.toml"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    if !output.status.success() {
        return Err(format!("{args:?} exited {:?}: {}", output.status.code(), String::from_utf8_lossy(&output.stderr)));
    }
    Ok(stdout)
}

fn mock_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_cli(dir.path(), &["ingest"])?;
    run_cli(dir.path(), &["annotate"])?;
    let report = run_cli(dir.path(), &["eval"])?;
    ensure!(report.contains("TP 8 FP 2 FN 2 TN 8"), "counts line missing:\n{report}");
    for line in ["precision 0.800", "recall 0.800", "F1 0.800", "accuracy 0.800"] {
        ensure!(report.lines().any(|l| l == line), "{line:?} missing:\n{report}");
    }
    Ok(())
}

fn dot_cosine(u: &[f64], v: &[f64]) -> f64 {
    let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    d / (nu * nv)
}

fn retrieval_sanity() -> Outcome {
    let store = ontology();
    ensure!(store.len() == 50, "fixture has {} concepts", store.len());
    let provider = HashedBagOfWords::named("default");
    let index = VectorIndex::build(&store, &provider).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for concept in store.concepts() {
        let top = index.top_k(&concept.preferred_name, 1, &provider).map_err(|e| e.to_string())?;
        let q = provider.embed(&concept.preferred_name).map_err(|e| e.to_string())?;
        let brute = store
            .concepts()
            .map(|c| (dot_cosine(q.as_slice(), index.vector(&c.concept_id).unwrap().as_slice()), &c.concept_id))
            .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            .unwrap();
        ensure!(
            top[0].0 == *brute.1,
            "{}: index {} vs scan {}",
            concept.preferred_name,
            top[0].0.identifier(),
            brute.1.identifier()
        );
        if top[0].0 == concept.concept_id {
            hits += 1;
        }
    }
    ensure!(hits == 50, "{hits}/50 at rank 1");
    Ok(())
}

fn raft_invariants() -> Outcome {
    let store = ontology();
    let ids: Vec<MeshId> = store.concepts().map(|c| c.concept_id.clone()).collect();
    let provider = HashedBagOfWords::named("default");
    let index = VectorIndex::build(&store, &provider).map_err(|e| e.to_string())?;
    let words = ["child", "wheeze", "itchy", "seizure", "joint", "pain", "blood", "sugar", "chest", "ear"];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let questions: Vec<RaftQuestion> = (0..100)
        .map(|i| RaftQuestion {
            question: (0..rng.gen_range(0..6))
                .map(|_| words[rng.gen_range(0..words.len())])
                .collect::<Vec<_>>()
                .join(" "),
            concept_id: ids[i % ids.len()].clone(),
        })
        .collect();
    for retrieval in [true, false] {
        let build = || {
            let r = retrieval.then_some(Retrieval { index: &index, provider: &provider });
            build_raft_dataset(&store, &questions, 3, 99, r).map_err(|e| e.to_string())
        };
        let points = build()?;
        ensure!(points.len() == 100, "{} datapoints", points.len());
        for (i, p) in points.iter().enumerate() {
            ensure!(p.oracle_doc.concept_id == questions[i].concept_id, "point {i}: wrong oracle");
            ensure!(p.distractor_docs.len() == 3, "point {i}: {} distractors", p.distractor_docs.len());
            for (a, d) in p.distractor_docs.iter().enumerate() {
                ensure!(d.concept_id != p.oracle_doc.concept_id, "point {i}: oracle among distractors");
                ensure!(d.body != p.oracle_doc.body, "point {i}: oracle text among distractors");
                ensure!(
                    p.distractor_docs[a + 1..].iter().all(|e| e.concept_id != d.concept_id),
                    "point {i}: repeated distractor"
                );
                ensure!(*d == build_rag_document(store.get(&d.concept_id).unwrap()), "point {i}: distractor text");
            }
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_raft_dataset(&points, &mut first).map_err(|e| e.to_string())?;
        write_raft_dataset(&build()?, &mut second).map_err(|e| e.to_string())?;
        ensure!(first == second, "regeneration differs (retrieval={retrieval})");
    }
    Ok(())
}

fn first_vote(text: &str) -> VerdictKind {
    let mut token = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() || c == '_' {
            token.push(c);
            continue;
        }
        let lower = token.to_ascii_lowercase();
        token.clear();
        if lower == "agree" {
            return VerdictKind::Agree;
        }
        if lower == "disagree" {
            return VerdictKind::Disagree;
        }
    }
    VerdictKind::Unparseable
}

fn scan_proposal(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while let Some(pos) = text[i..].find("mesh:D") {
        let start = i + pos + 6;
        let end = start + bytes[start..].iter().take_while(|b| b.is_ascii_digit()).count();
        if end > start {
            return Some(format!("mesh:D{}", &text[start..end]));
        }
        i = i + pos + 1;
    }
    None
}

fn verdict_totality() -> Outcome {
    let pieces = [
        "AGREE",
        "agree",
        "Agree",
        "DISAGREE",
        "disagree",
        "DisAgree",
        "agreed",
        "disagreement",
        "_agree",
        "agree_",
        "mesh:D",
        "mesh:D001249",
        "mesh:Dx12",
        "MESH:D42",
        "D0099",
        ".",
        ",",
        "!",
        " ",
        "\n",
        "-",
        "é",
        "ÄGREE",
        "日本",
        "🙂",
        "\u{0}",
        "\"",
        "NONE",
        "the concept",
        "is correct",
        "1234",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for i in 0..1000 {
        let n = rng.gen_range(0..10);
        let mut text: String = (0..n).map(|_| pieces[rng.gen_range(0..pieces.len())]).collect();
        if i % 10 == 0 {
            text = (0..rng.gen_range(0..30)).map(|_| rng.gen::<char>()).collect();
        }
        let v = std::panic::catch_unwind(|| parse_verdict(&text)).map_err(|_| format!("panic on {text:?}"))?;
        let want = first_vote(&text);
        ensure!(v.kind == want, "{text:?}: {:?} vs {want:?}", v.kind);
        let proposal = v.proposal.as_ref().map(ConceptId::to_string);
        let want_proposal = if want == VerdictKind::Disagree { scan_proposal(&text) } else { None };
        ensure!(proposal == want_proposal, "{text:?}: proposal {proposal:?} vs {want_proposal:?}");
    }
    Ok(())
}

fn flag_collapse() -> Outcome {
    let store = ontology();
    let concepts: Vec<_> = store.concepts().cloned().collect();
    let templates = TemplateRegistry::builtin();
    let words = ["cough", "asthma", "mild", "since", "2019", "eczema", "ça", "ok"];
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for i in 0..20 {
        let answer: String =
            (0..rng.gen_range(1..6)).map(|_| words[rng.gen_range(0..words.len())]).collect::<Vec<_>>().join(" ");
        let record = SurveyRecord {
            record_id: format!("c{i}"),
            question_text: format!("Question number {i}?"),
            answer_text: answer,
            field_type: FieldType::ALL[rng.gen_range(0..FieldType::ALL.len())],
            preceding_questions: (0..rng.gen_range(0..3)).map(|k| format!("Earlier question {k}?")).collect(),
            expects_disease: rng.gen(),
        };
        let text = record.annotation_text();
        let len = text.chars().count();
        let begin = rng.gen_range(0..len - 1);
        let end = rng.gen_range(begin + 1..=len);
        let mut mention = human(&record.record_id, &text, begin, end, AnnotationSource::NerBackend);
        let concept = &concepts[rng.gen_range(0..concepts.len())];
        mention.concept =
            if rng.gen_bool(0.2) { ConceptId::Unnormalized } else { ConceptId::Mesh(concept.concept_id.clone()) };
        let mut ctx = PromptContext::new(record, mention);
        ctx.backend_concept_name = Some(concept.preferred_name.clone());
        ctx.retrieved_docs = concepts.iter().take(rng.gen_range(0..4)).map(build_rag_document).collect();
        ctx.examples = (0..rng.gen_range(0..4))
            .map(|k| FewShotExample {
                question: format!("Example {k}?"),
                mention: "wheeze".into(),
                candidate: "Asthma (mesh:D001249)".into(),
                expected: "AGREE".into(),
            })
            .collect();
        let flags =
            build_prompt(&PromptSpec::new(Strategy::RagFsiFlags { use_rag: false, use_fsi: false }), &ctx, &templates)
                .map_err(|e| e.to_string())?;
        let zero = build_prompt(&PromptSpec::new(Strategy::ZeroShotConceptVsConcept), &ctx, &templates)
            .map_err(|e| e.to_string())?;
        ensure!(flags.as_bytes() == zero.as_bytes(), "context {i}: prompts differ");
    }
    Ok(())
}

const EXPECTED_HEADERS: [(&str, &[&str]); 7] = [
    (
        "table1_ner_nen",
        &[
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
        ],
    ),
    ("table2_zero_shot", &["Prompt", "Model", "correct answers (%)", "hallucination rate (%)"]),
    (
        "table3_fine_tuning",
        &[
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
        ],
    ),
    (
        "table4_rag_fsi",
        &[
            "Setting",
            "Model",
            "ROUGE-1 F1",
            "ROUGE-1 P",
            "ROUGE-1 R",
            "Coherence",
            "BERN2 alignment accuracy",
            "GT alignment accuracy",
        ],
    ),
    ("table5_binary_flags", &["Configuration", "BERN2 alignment accuracy", "GT alignment accuracy"]),
    ("table6_cot", &["Model", "Variant", "normalised performance", "true positive (%)", "false negative (%)"]),
    ("table7_embeddings", &["Embedding", "ROUGE-1 F1", "ROUGE-1 P", "ROUGE-1 R", "coherence"]),
];

fn csv_header(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(text.lines().next().unwrap_or_default().split(',').map(str::to_string).collect())
}

fn report_shape() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();
    run_cli(out, &["ingest"])?;
    run_cli(out, &["annotate"])?;
    let mut eval: Vec<String> = vec!["eval".into()];
    let runs: [(&str, &[&str]); 5] = [
        ("zero-shot", &[]),
        ("rag-fsi", &[]),
        ("rag-fsi-flags", &["--flags", "rag=off,fsi=on"]),
        ("cot:none", &[]),
        ("cot:strong", &[]),
    ];
    for (i, (strategy, extra)) in runs.iter().enumerate() {
        let path = out.join(format!("verdicts_{i}.jsonl"));
        let path_str = path.to_str().unwrap();
        let mut args = vec!["run", "--strategy", strategy, "--output", path_str];
        args.extend_from_slice(extra);
        run_cli(out, &args)?;
        eval.push("--verdicts".into());
        eval.push(path_str.into());
    }
    let summaries = fixtures().join("summaries.jsonl");
    for label in ["rag-fsi@scripted-judge=", ""] {
        eval.push("--summaries".into());
        eval.push(format!("{label}{}", summaries.display()));
    }
    eval.extend(["--tables".into(), "all".into()]);
    let eval_refs: Vec<&str> = eval.iter().map(String::as_str).collect();
    run_cli(out, &eval_refs)?;

    let report_dir = out.join("report");
    let markdown = fs::read_to_string(report_dir.join("report.md")).map_err(|e| e.to_string())?;
    for (stem, headers) in EXPECTED_HEADERS {
        let got = csv_header(&report_dir.join(format!("{stem}.csv")))?;
        ensure!(got == headers, "{stem}: headers {got:?}");
        ensure!(markdown.contains(&format!("| {} |", headers.join(" | "))), "{stem}: markdown header missing");
        let rows = fs::read_to_string(report_dir.join(format!("{stem}.csv"))).map_err(|e| e.to_string())?;
        ensure!(rows.lines().count() >= 2, "{stem}: no data rows");
    }

    let degenerate = ReportInputs {
        ner: Some(NerSummary {
            label: "empty".into(),
            counts: ConfusionCounts::new(0, 5, 0, 0),
            concepts: ConceptAccuracy::new(0, 0),
        }),
        ..ReportInputs::default()
    };
    let report = render_report(&degenerate);
    ensure!(report.tables.len() == 7, "{} tables", report.tables.len());
    let t1 = report.tables[0].to_csv();
    let row: Vec<&str> = t1.lines().nth(1).unwrap_or_default().split(',').collect();
    ensure!(row.len() == 12, "table 1 row {row:?}");
    for (col, cell) in row.iter().enumerate() {
        let zero_den = matches!(col, 1 | 3 | 6 | 7);
        ensure!((*cell == "NR") == zero_den, "table 1 column {col} rendered {cell:?}");
    }
    ensure!(report.markdown.contains("| empty | NR |"), "markdown lacks NR cells");
    Ok(())
}

fn canonical(bytes: &[u8]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    for line in bytes.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
        let v: serde_json::Value = serde_json::from_slice(line).map_err(|e| e.to_string())?;
        serde_json::to_writer(&mut out, &v).map_err(|e| e.to_string())?;
        out.push(b'\n');
    }
    Ok(out)
}

fn doccano_round_trip() -> Outcome {
    let original = fs::read(fixtures().join("doccano_25.jsonl")).map_err(|e| e.to_string())?;
    let truth = import_doccano(original.as_slice()).map_err(|e| e.to_string())?;
    ensure!(truth.texts.len() == 25, "{} records imported", truth.texts.len());
    let mut exported = Vec::new();
    export_doccano(&truth.annotations, &truth.texts, &mut exported).map_err(|e| e.to_string())?;
    ensure!(canonical(&exported)? == canonical(&original)?, "export differs from the fixture");
    let again = import_doccano(exported.as_slice()).map_err(|e| e.to_string())?;
    ensure!(again == truth, "import after export differs");
    let texts: BTreeMap<_, _> = again.texts.clone();
    let mut twice = Vec::new();
    export_doccano(&again.annotations, &texts, &mut twice).map_err(|e| e.to_string())?;
    ensure!(twice == exported, "second export not byte-identical");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "normalised performance reproduces the published CoT column",
            Duration::from_secs(1),
            normalised_performance_column,
        ),
        ("confusion-rate identities over 1000 random counts", Duration::from_secs(1), metric_identities),
        ("mention agreement requires identical spans", Duration::from_secs(1), mention_strictness),
        ("ROUGE-n equals a brute-force clipped counter", Duration::from_secs(5), rouge_oracle),
        ("mock pipeline scores 0.800 end to end", Duration::from_secs(5), mock_pipeline),
        ("exact preferred names retrieve their concept at rank 1", Duration::from_secs(5), retrieval_sanity),
        ("RAFT datapoints satisfy distractor invariants and replay", Duration::from_secs(5), raft_invariants),
        ("verdict parser is total and matches a reference scan", Duration::from_secs(2), verdict_totality),
        ("binary flags off/off equals zero-shot prompt bytes", Duration::from_secs(1), flag_collapse),
        ("report emits seven tables with expected headers and NR", Duration::from_secs(5), report_shape),
        ("Doccano export after import is the identity", Duration::from_secs(1), doccano_round_trip),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result =
            result.and_then(
                |()| {
                    if elapsed <= limit {
                        Ok(())
                    } else {
                        Err(format!("took {elapsed:?}, limit {limit:?}"))
                    }
                },
            );
        match result {
            Ok(()) => println!("PASS  {name} ({} ms)", elapsed.as_millis()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({} ms): {why}", elapsed.as_millis());
            }
        }
    }
    println!("{} of {} criteria passed", 11 - failed, 11);
    if failed > 0 {
        std::process::exit(1);
    }
}
