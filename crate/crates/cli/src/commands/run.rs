use std::path::{Path, PathBuf};

use clap::Args;
use phenokit::corpus::{IngestOptions, NormalizedAnnotation};
use phenokit::evaluate::{write_verdicts, VerdictRecord};
use phenokit::ontology::VectorIndex;
use phenokit::orchestrate::{
    load_few_shot_path, run_chain, run_strategy, HttpLlmBackend, Judgement, LlmBackend, PromptSpec, Retrieval,
    RunInputs, ScriptedLlmBackend, Strategy, StrategyError, TemplateRegistry, VerdictKind,
};

use super::{load_corpus, load_outcomes, load_store};
use crate::config::{required, LlmSection, RunConfig};
use crate::error::{CliError, CliResult};
use crate::files::{sidecar, write_atomic, RunManifest, RunStatus};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Strategy name, e.g. zero-shot, fsi, cot:strong, rag-fsi, rag-fsi-flags.
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub retrieval_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Binary flags, e.g. `rag=off,fsi=on`; selects rag-fsi-flags.
    #[arg(long)]
    pub flags: Option<String>,
    /// Also write every prompt sent, beside the verdicts as `<stem>.prompts.txt`.
    #[arg(long)]
    pub dump_prompts: bool,
    /// Scripted LLM rule file (JSONL of pattern/response).
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Chain a generator with an evaluator.
    #[arg(long)]
    pub chain: bool,
    /// Scripted rule file for the chain evaluator.
    #[arg(long)]
    pub evaluator_script: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_flags(text: &str) -> CliResult<(bool, bool)> {
    let (mut rag, mut fsi) = (None, None);
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) =
            part.split_once('=').ok_or_else(|| CliError::Usage(format!("bad flag {part:?}; expected key=on|off")))?;
        let on = match value {
            "on" | "true" => true,
            "off" | "false" => false,
            other => return Err(CliError::Usage(format!("bad flag value {other:?}; expected on or off"))),
        };
        match key {
            "rag" => rag = Some(on),
            "fsi" => fsi = Some(on),
            other => return Err(CliError::Usage(format!("unknown flag {other:?}; expected rag or fsi"))),
        }
    }
    match (rag, fsi) {
        (Some(r), Some(f)) => Ok((r, f)),
        _ => Err(CliError::Usage("--flags must set both rag and fsi".into())),
    }
}

pub fn resolve_spec(args: &RunArgs, config: &RunConfig) -> CliResult<PromptSpec> {
    let name = args.strategy.clone().unwrap_or_else(|| config.strategy.name.clone());
    let mut strategy = Strategy::from_name(&name).map_err(CliError::Usage)?;
    if let Strategy::RagFsiFlags { use_rag, use_fsi } = &mut strategy {
        *use_rag = config.strategy.rag;
        *use_fsi = config.strategy.fsi;
    }
    if let Some(flags) = &args.flags {
        if args.strategy.as_deref().is_some_and(|s| s != "rag-fsi-flags") {
            return Err(CliError::Usage(format!("--flags applies to rag-fsi-flags, not {name}")));
        }
        let (use_rag, use_fsi) = parse_flags(flags)?;
        strategy = Strategy::RagFsiFlags { use_rag, use_fsi };
    }
    let mut spec = PromptSpec::new(strategy).with_retrieval_k(args.retrieval_k.unwrap_or(config.strategy.retrieval_k));
    if let Some(shots) = args.shots.or(config.strategy.shots) {
        spec = spec.with_shots(shots);
    }
    spec.validate().map_err(CliError::validation)?;
    Ok(spec)
}

fn build_llm(section: &LlmSection, script: Option<&Path>, token_var: &str) -> CliResult<Box<dyn LlmBackend>> {
    match script.map(Path::to_path_buf).or_else(|| section.script.clone()) {
        Some(path) => {
            crate::files::require_input(&path)?;
            let backend = ScriptedLlmBackend::from_path(&section.name, &path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            Ok(Box::new(backend))
        }
        None => Ok(Box::new(HttpLlmBackend::new(&section.name, &section.config, std::env::var(token_var).ok()))),
    }
}

fn render_prompts(judgements: &[Judgement]) -> String {
    let mut out = String::new();
    for j in judgements {
        for (i, p) in j.prompts.iter().enumerate() {
            out.push_str(&format!(
                "### {} [{},{}] prompt {}\n{}\n\n",
                j.annotation.record_id,
                j.annotation.span.begin,
                j.annotation.span.end,
                i + 1,
                p
            ));
        }
    }
    out
}

pub fn execute(args: &RunArgs, config: &RunConfig) -> CliResult<()> {
    let spec = resolve_spec(args, config)?;
    let seed = args.seed.unwrap_or(config.seed);
    let corpus_path = args.corpus.clone().unwrap_or_else(|| config.corpus_path());
    let predictions_path = args.predictions.clone().unwrap_or_else(|| config.predictions_path());
    let ontology_path = args.ontology.clone().map(Some).unwrap_or_else(|| config.paths.ontology.clone());
    let ontology_path = required(&ontology_path, "ontology")?;
    let output = args.output.clone().unwrap_or_else(|| config.verdicts_path());
    let chain = args.chain || config.strategy.chain;

    let corpus = load_corpus(&corpus_path, &IngestOptions::default())?;
    let outcomes = load_outcomes(&predictions_path)?;
    let annotations: Vec<NormalizedAnnotation> = outcomes.iter().flat_map(|o| o.annotations.iter().cloned()).collect();
    let store = load_store(&ontology_path)?;
    let mut inputs: Vec<PathBuf> = vec![corpus_path, predictions_path, ontology_path];

    let templates = match &config.paths.templates {
        Some(dir) => {
            crate::files::require_input(dir)?;
            TemplateRegistry::from_dir(dir).map_err(CliError::validation)?
        }
        None => TemplateRegistry::builtin(),
    };
    let pool = if spec.effective_shots() > 0 {
        let path = required(&config.paths.few_shot_pool, "few_shot_pool")?;
        crate::files::require_input(&path)?;
        let pool = load_few_shot_path(&path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        inputs.push(path);
        pool
    } else {
        Vec::new()
    };
    let provider = config.embedding.build()?;
    let index = if spec.uses_rag() {
        Some(VectorIndex::build(&store, provider.as_ref()).map_err(|e| CliError::Backend(e.to_string()))?)
    } else {
        None
    };

    let llm = build_llm(&config.llm, args.script.as_deref(), "PHENOKIT_LLM_TOKEN")?;
    let evaluator = if chain {
        let section =
            config.evaluator.clone().unwrap_or_else(|| LlmSection { name: "evaluator".into(), ..config.llm.clone() });
        Some(build_llm(&section, args.evaluator_script.as_deref(), "PHENOKIT_EVALUATOR_TOKEN")?)
    } else {
        None
    };
    for path in
        [args.script.clone().or_else(|| config.llm.script.clone()), args.evaluator_script.clone()].into_iter().flatten()
    {
        inputs.push(path);
    }

    let manifest_path = sidecar(&output, "manifest.json");
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut snapshot = config.snapshot();
    snapshot["resolved"] = serde_json::json!({
        "strategy": spec.strategy.name(),
        "shots": spec.effective_shots(),
        "retrieval_k": spec.retrieval_k,
        "chain": chain,
        "model": match &evaluator {
            Some(e) => format!("{}+{}", llm.name(), e.name()),
            None => llm.name().to_string(),
        },
        "template_version": templates.version(),
    });
    let mut manifest = RunManifest::start("run", seed, snapshot, &input_refs)?;
    manifest.write(&manifest_path)?;

    let run_inputs = RunInputs {
        records: corpus.records(),
        annotations: &annotations,
        store: &store,
        retrieval: index.as_ref().map(|index| Retrieval { index, provider: provider.as_ref() }),
        few_shot_pool: &pool,
        templates: &templates,
    };
    let result = match &evaluator {
        Some(evaluator) => run_chain(&run_inputs, &spec, llm.as_ref(), evaluator.as_ref(), &config.llm.config, seed),
        None => run_strategy(&run_inputs, &spec, llm.as_ref(), &config.llm.config, seed),
    };
    let judgements = result.map_err(|e| match e {
        StrategyError::UnknownRecord { .. } | StrategyError::FewShot(_) | StrategyError::Prompt(_) => {
            CliError::validation(e)
        }
        other => CliError::Backend(other.to_string()),
    })?;

    let records: Vec<VerdictRecord> = judgements.iter().map(VerdictRecord::from).collect();
    let mut bytes = Vec::new();
    write_verdicts(&records, &mut bytes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&output, &bytes)?;
    let mut outputs = vec![output.clone()];
    if args.dump_prompts {
        let prompts_path = sidecar(&output, "prompts.txt");
        write_atomic(&prompts_path, render_prompts(&judgements).as_bytes())?;
        outputs.push(prompts_path);
    }
    let failed = judgements.iter().filter(|j| j.verdict.error.is_some()).count();
    let outage = !judgements.is_empty() && failed == judgements.len();
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    manifest.finish(&manifest_path, &output_refs, if outage { RunStatus::Failed } else { RunStatus::Complete })?;

    let count = |k: VerdictKind| records.iter().filter(|r| r.kind == k).count();
    println!(
        "{} verdicts ({}{}): {} agree, {} disagree, {} unparseable, {} hallucinated, {} backend failures",
        records.len(),
        spec.strategy,
        if chain { ", chained" } else { "" },
        count(VerdictKind::Agree),
        count(VerdictKind::Disagree),
        count(VerdictKind::Unparseable),
        records.iter().filter(|r| r.hallucinated).count(),
        failed
    );
    println!("wrote {}", output.display());
    if outage {
        return Err(CliError::Backend(format!("every LLM call failed; see {}", output.display())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsing() {
        assert_eq!(parse_flags("rag=off,fsi=on").unwrap(), (false, true));
        assert!(parse_flags("rag=off").is_err());
        assert!(parse_flags("rag=maybe,fsi=on").is_err());
        assert!(parse_flags("rag=on,tools=on").is_err());
    }
}
