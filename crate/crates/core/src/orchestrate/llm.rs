use std::fs;
use std::io::{self, BufRead};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transport::{JsonClient, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmParams {
    pub max_tokens: u32,
    /// 0.0 means greedy decoding.
    pub temperature: f64,
}

impl Default for LlmParams {
    fn default() -> Self {
        LlmParams { max_tokens: 256, temperature: 0.0 }
    }
}

/// Connection and scheduling settings for an LLM backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint: String,
    pub max_inflight: usize,
    pub retry_budget: u32,
    pub timeout_ms: u64,
    pub backoff_ms: u64,
    #[serde(flatten)]
    pub params: LlmParams,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "http://localhost:8080/generate".to_string(),
            max_inflight: 4,
            retry_budget: 2,
            timeout_ms: 60_000,
            backoff_ms: 500,
            params: LlmParams::default(),
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_inflight == 0 {
            return Err("max_inflight must be at least 1".into());
        }
        if self.params.temperature.is_nan() || self.params.temperature < 0.0 {
            return Err("temperature must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no scripted rule matches the prompt")]
    NoRule,
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Transport(_) => true,
            LlmError::Status { status, .. } => *status >= 500 || *status == 429,
            LlmError::Malformed(_) | LlmError::NoRule => false,
        }
    }
}

pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, LlmError>;
}

/// Calls `backend`, retrying retryable failures up to `config.retry_budget`
/// times with linear backoff.
pub fn complete_with_retry(backend: &dyn LlmBackend, prompt: &str, config: &LlmConfig) -> Result<String, LlmError> {
    let mut attempt = 0;
    loop {
        match backend.complete(prompt, &config.params) {
            Ok(text) => return Ok(text),
            Err(e) if e.is_retryable() && attempt < config.retry_budget => {
                attempt += 1;
                if config.backoff_ms > 0 {
                    std::thread::sleep(Duration::from_millis(config.backoff_ms * u64::from(attempt)));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

#[derive(Debug, Clone)]
pub struct HttpLlmBackend {
    name: String,
    client: JsonClient,
}

impl HttpLlmBackend {
    pub fn new(name: &str, config: &LlmConfig, bearer_token: Option<String>) -> Self {
        HttpLlmBackend {
            name: name.to_string(),
            client: JsonClient::new(&config.endpoint, Duration::from_millis(config.timeout_ms), bearer_token),
        }
    }
}

impl LlmBackend for HttpLlmBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str, params: &LlmParams) -> Result<String, LlmError> {
        let request = CompletionRequest { prompt, max_tokens: params.max_tokens, temperature: params.temperature };
        let body = self.client.post(&request).map_err(|e| match e {
            TransportError::Io(msg) => LlmError::Transport(msg),
            TransportError::Status { status, body } => LlmError::Status { status, body },
        })?;
        serde_json::from_str::<CompletionResponse>(&body)
            .map(|r| r.text)
            .map_err(|e| LlmError::Malformed(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRule {
    /// Regular expression searched for in the prompt.
    pub pattern: String,
    pub response: String,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: bad pattern: {detail}")]
    BadPattern { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Deterministic backend answering from a list of pattern rules. The first
/// rule whose pattern occurs in the prompt supplies the response.
#[derive(Debug)]
pub struct ScriptedLlmBackend {
    name: String,
    rules: Vec<(Regex, String)>,
    calls: AtomicUsize,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedLlmBackend {
    pub fn new(name: &str, rules: Vec<ScriptRule>) -> Result<Self, ScriptError> {
        let compiled = rules
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                Regex::new(&r.pattern)
                    .map(|re| (re, r.response))
                    .map_err(|e| ScriptError::BadPattern { line: i + 1, detail: e.to_string() })
            })
            .collect::<Result<_, _>>()?;
        Ok(ScriptedLlmBackend {
            name: name.to_string(),
            rules: compiled,
            calls: AtomicUsize::new(0),
            prompts: Mutex::new(Vec::new()),
        })
    }

    /// A backend that gives the same answer to every prompt.
    pub fn constant(name: &str, response: &str) -> Self {
        Self::new(name, vec![ScriptRule { pattern: String::new(), response: response.to_string() }])
            .expect("empty pattern compiles")
    }

    pub fn from_reader<R: BufRead>(name: &str, reader: R) -> Result<Self, ScriptError> {
        let mut rules = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rule: ScriptRule = serde_json::from_str(&line)
                .map_err(|e| ScriptError::Malformed { line: i + 1, detail: e.to_string() })?;
            rules.push(rule);
        }
        Self::new(name, rules)
    }

    pub fn from_path(name: &str, path: &Path) -> Result<Self, ScriptError> {
        Self::from_reader(name, io::BufReader::new(fs::File::open(path)?))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Every prompt received, in call order.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().map(|p| p.clone()).unwrap_or_default()
    }
}

impl LlmBackend for ScriptedLlmBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str, _params: &LlmParams) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Ok(mut prompts) = self.prompts.lock() {
            prompts.push(prompt.to_string());
        }
        self.rules
            .iter()
            .find(|(re, _)| re.is_match(prompt))
            .map(|(_, response)| response.clone())
            .ok_or(LlmError::NoRule)
    }
}
