//! Disease phenotyping of survey records.
//!
//! The pipeline ingests survey records, drives a BERN2-compatible NER/NEN
//! backend over them, asks LLMs to verify or refine the backend's concept
//! assignments (zero-shot, few-shot, chain-of-thought, retrieval-augmented),
//! and scores everything against human ground truth.
//!
//! Ratio-valued evaluation code is generic over [`Scalar`]; the aliases at the
//! crate root fix the common choices (`f64` for reports, [`Rational64`] for
//! exact identity checks).
//!
//! ```
//! use phenokit::evaluate::{compute_metrics, ConfusionCounts};
//! use phenokit::{ExactMetrics, MetricsReport, Rational64};
//!
//! let counts = ConfusionCounts::new(8, 8, 2, 2);
//! let m: MetricsReport = compute_metrics(&counts);
//! assert!((m.f1.unwrap() - 0.8).abs() < 1e-12);
//! let exact: ExactMetrics = compute_metrics(&counts);
//! assert_eq!(exact.recall.unwrap() + exact.fnr.unwrap(), Rational64::from_integer(1));
//! ```

pub mod annotate;
mod concurrency;
pub mod corpus;
pub mod evaluate;
pub mod ontology;
pub mod orchestrate;
pub mod scalar;
pub mod seed;
mod transport;

pub use num_rational::Rational64;
pub use scalar::{Real, Scalar};

pub use corpus::{ConceptId, FieldType, MeshId, NormalizedAnnotation, SurveyRecord, TextSpan};

/// Confusion-derived rates in double precision, as written to reports.
pub type MetricsReport = evaluate::Metrics<f64>;
/// Confusion-derived rates in exact rational arithmetic.
pub type ExactMetrics = evaluate::Metrics<Rational64>;
/// ROUGE-n precision/recall/F1 in double precision.
pub type RougeScore = evaluate::Rouge<f64>;
/// ROUGE-n in exact rational arithmetic.
pub type ExactRougeScore = evaluate::Rouge<Rational64>;
