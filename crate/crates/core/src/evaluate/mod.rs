//! Scoring against ground truth and report rendering.
//!
//! Mention matching is strict: only identical character spans agree.
//! Ratio-valued results are generic over [`Scalar`](crate::Scalar).

mod alignment;
mod matching;
mod metrics;
mod report;
mod rouge;

pub use alignment::{
    alignment_accuracy, alignment_confusion, alignment_from_records, read_verdicts, write_verdicts, AlignmentError,
    AlignmentReport, VerdictIoError, VerdictRecord,
};
pub use matching::{match_concepts, match_mentions, MatchError, MatchedPair, MentionMatch};
pub use metrics::{
    compute_metrics, hallucination_rate, normalised_performance, ConceptAccuracy, ConfusionCounts, Metrics,
    NormaliseError,
};
pub use report::{
    render_report, AlignmentMetricsRow, Cell, CotRow, EmbeddingRow, FlagRow, NerSummary, RagFsiRow, Report,
    ReportInputs, Table, Value, ZeroShotRow, NR,
};
pub use rouge::{
    coherence_score, mean_coherence, mean_rouge, rouge_n, rouge_n_tokens, rouge_tokens, Rouge, RougeError,
};
