//! Run configuration: one TOML file, sections per module. Relative paths are
//! resolved against the file's directory. Secrets never live here; backend
//! tokens come from `PHENOKIT_NER_TOKEN`, `PHENOKIT_LLM_TOKEN`,
//! `PHENOKIT_EVALUATOR_TOKEN` and `PHENOKIT_EMBEDDING_TOKEN`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use phenokit::annotate::BackendConfig;
use phenokit::ontology::{EmbeddingProvider, HashedBagOfWords, RemoteEmbeddingProvider, FALLBACK_DIMENSION};
use phenokit::orchestrate::LlmConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw record file read by `ingest`.
    pub records: Option<PathBuf>,
    /// Validated corpus; defaults to `<output_dir>/corpus.jsonl`.
    pub corpus: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub verdicts: Option<PathBuf>,
    pub ontology: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub few_shot_pool: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub raft_questions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub disease_keywords: Vec<String>,
    pub sample_size: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NerSection {
    #[serde(flatten)]
    pub backend: BackendConfig,
    pub mock_lexicon: Option<PathBuf>,
    /// Row label in the NER/NEN table.
    pub label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmSection {
    pub name: String,
    #[serde(flatten)]
    pub config: LlmConfig,
    /// Scripted rule file; when set, no network backend is used.
    pub script: Option<PathBuf>,
}

impl Default for LlmSection {
    fn default() -> Self {
        LlmSection { name: "llm".into(), config: LlmConfig::default(), script: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    /// `default` (hashed bag of words) or `remote`.
    pub provider: String,
    pub name: String,
    pub endpoint: Option<String>,
    pub dimension: usize,
    pub timeout_ms: u64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            provider: "default".into(),
            name: "default".into(),
            endpoint: None,
            dimension: FALLBACK_DIMENSION,
            timeout_ms: 30_000,
        }
    }
}

impl EmbeddingSection {
    pub fn build(&self) -> CliResult<Box<dyn EmbeddingProvider>> {
        match self.provider.as_str() {
            "default" => Ok(Box::new(HashedBagOfWords::named(&self.name))),
            "remote" => {
                let endpoint = self
                    .endpoint
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("embedding.endpoint is required for the remote provider".into()))?;
                Ok(Box::new(RemoteEmbeddingProvider::new(
                    &self.name,
                    endpoint,
                    self.dimension,
                    Duration::from_millis(self.timeout_ms),
                    std::env::var("PHENOKIT_EMBEDDING_TOKEN").ok(),
                )))
            }
            other => Err(CliError::Usage(format!("unknown embedding provider {other:?}; expected default or remote"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub name: String,
    pub shots: Option<usize>,
    pub retrieval_k: usize,
    /// Flag values for `rag-fsi-flags`.
    pub rag: bool,
    pub fsi: bool,
    /// Run the generator/evaluator chain instead of a single model.
    pub chain: bool,
}

impl Default for StrategySection {
    fn default() -> Self {
        StrategySection { name: "zero-shot".into(), shots: None, retrieval_k: 3, rag: true, fsi: true, chain: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaftSection {
    pub n_distractors: usize,
    /// Hard negatives by retrieval; random draws when false.
    pub retrieval: bool,
}

impl Default for RaftSection {
    fn default() -> Self {
        RaftSection { n_distractors: 3, retrieval: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub paths: Paths,
    pub corpus: CorpusSection,
    pub ner: NerSection,
    pub llm: LlmSection,
    pub evaluator: Option<LlmSection>,
    pub embedding: EmbeddingSection,
    pub strategy: StrategySection,
    pub raft: RaftSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            paths: Paths::default(),
            corpus: CorpusSection::default(),
            ner: NerSection::default(),
            llm: LlmSection::default(),
            evaluator: None,
            embedding: EmbeddingSection::default(),
            strategy: StrategySection::default(),
            raft: RaftSection::default(),
        }
    }
}

fn rebase(base: &Path, path: &mut Option<PathBuf>) {
    if let Some(p) = path {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        config.resolve(&base);
        Ok(config)
    }

    fn resolve(&mut self, base: &Path) {
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
        let p = &mut self.paths;
        for slot in [
            &mut p.records,
            &mut p.corpus,
            &mut p.predictions,
            &mut p.verdicts,
            &mut p.ontology,
            &mut p.gold,
            &mut p.few_shot_pool,
            &mut p.templates,
            &mut p.raft_questions,
        ] {
            rebase(base, slot);
        }
        rebase(base, &mut self.ner.mock_lexicon);
        rebase(base, &mut self.llm.script);
        if let Some(e) = &mut self.evaluator {
            rebase(base, &mut e.script);
        }
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.paths.corpus.clone().unwrap_or_else(|| self.output("corpus.jsonl"))
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.paths.predictions.clone().unwrap_or_else(|| self.output("predictions.jsonl"))
    }

    pub fn verdicts_path(&self) -> PathBuf {
        self.paths.verdicts.clone().unwrap_or_else(|| self.output("verdicts.jsonl"))
    }

    pub fn manifest_path(&self, command: &str) -> PathBuf {
        self.output(&format!("{command}.manifest.json"))
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Unwraps a path that must be configured, naming the flag and key to set.
pub fn required(path: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    path.clone()
        .ok_or_else(|| CliError::Usage(format!("no {what} given; pass the flag or set paths.{what} in the config")))
}
