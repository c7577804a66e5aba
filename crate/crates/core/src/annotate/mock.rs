//! Deterministic in-process backend speaking the NER wire contract.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use super::{
    BackendError, NerBackend, NerRequest, NerResponse, NerResult, WireAnnotation, WireSpan, CUI_LESS, DISEASE_OBJ,
};
use crate::corpus::ConceptId;

type FailurePredicate = Box<dyn Fn(&str) -> bool + Send + Sync>;

/// Annotates by case-insensitive, longest-match, whole-token lexicon scan.
///
/// Also instrumented: it counts calls and records the peak number of
/// concurrent `submit` calls.
pub struct MockNerBackend {
    terms: Vec<(Vec<char>, ConceptId)>,
    fail_when: Option<FailurePredicate>,
    delay: Duration,
    calls: AtomicUsize,
    inflight: AtomicUsize,
    peak_inflight: AtomicUsize,
}

impl MockNerBackend {
    pub fn new<I, S>(lexicon: I) -> Self
    where
        I: IntoIterator<Item = (S, ConceptId)>,
        S: AsRef<str>,
    {
        let mut terms: Vec<(Vec<char>, ConceptId)> = lexicon
            .into_iter()
            .map(|(t, c)| (t.as_ref().to_lowercase().chars().collect::<Vec<_>>(), c))
            .filter(|(t, _)| !t.is_empty())
            .collect();
        terms.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        MockNerBackend {
            terms,
            fail_when: None,
            delay: Duration::ZERO,
            calls: AtomicUsize::new(0),
            inflight: AtomicUsize::new(0),
            peak_inflight: AtomicUsize::new(0),
        }
    }

    /// Any request containing a text matching `predicate` fails with a
    /// transport error.
    pub fn failing_when(mut self, predicate: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        self.fail_when = Some(Box::new(predicate));
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn peak_inflight(&self) -> usize {
        self.peak_inflight.load(Ordering::SeqCst)
    }

    /// Lexicon hits in `text`, in order of appearance.
    pub fn annotate_text(&self, text: &str) -> NerResult {
        let chars: Vec<char> = text.chars().collect();
        let mut annotations = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let at_token_start = chars[i].is_alphanumeric() && (i == 0 || !chars[i - 1].is_alphanumeric());
            let hit = if at_token_start {
                self.terms.iter().find(|(term, _)| {
                    let end = i + term.len();
                    end <= chars.len()
                        && term.iter().zip(&chars[i..end]).all(|(t, c)| c.to_lowercase().eq(std::iter::once(*t)))
                        && (end == chars.len() || !chars[end].is_alphanumeric())
                })
            } else {
                None
            };
            match hit {
                Some((term, concept)) => {
                    let end = i + term.len();
                    annotations.push(WireAnnotation {
                        mention: chars[i..end].iter().collect(),
                        span: WireSpan { begin: i, end },
                        obj: DISEASE_OBJ.to_string(),
                        id: vec![match concept {
                            ConceptId::Unnormalized => CUI_LESS.to_string(),
                            c => c.to_string(),
                        }],
                        prob: None,
                    });
                    i = end;
                }
                None => i += 1,
            }
        }
        NerResult { annotations }
    }
}

impl NerBackend for MockNerBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn submit(&self, request: &NerRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.inflight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak_inflight.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let failing = self.fail_when.as_ref().is_some_and(|p| request.texts.iter().any(|t| p(t)));
        let result = if failing {
            Err(BackendError::Transport("mock backend refused request".into()))
        } else {
            let response = NerResponse { results: request.texts.iter().map(|t| self.annotate_text(t)).collect() };
            Ok(serde_json::to_string(&response).expect("response serializes"))
        };
        self.inflight.fetch_sub(1, Ordering::SeqCst);
        result
    }
}

/// Reads `term<TAB>concept` lines (concept `mesh:D...` or `NONE`).
pub fn load_mock_lexicon(path: &Path) -> io::Result<Vec<(String, ConceptId)>> {
    let text = fs::read_to_string(path)?;
    let invalid = |line: usize, msg: &str| {
        io::Error::new(io::ErrorKind::InvalidData, format!("{}:{line}: {msg}", path.display()))
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            let (term, concept) = l.split_once('\t').ok_or_else(|| invalid(i + 1, "expected term<TAB>concept"))?;
            let concept = concept.trim().parse().map_err(|e: String| invalid(i + 1, &e))?;
            Ok((term.trim().to_lowercase(), concept))
        })
        .collect()
}
