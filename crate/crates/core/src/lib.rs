//! Event-extraction benchmark harness.
//!
//! The crate covers the whole evaluation pipeline: a canonical corpus format with
//! character offsets preserved, document windowing, balanced document-level splits,
//! six trigger/argument metrics (including attachment-aware AI+ and AC+), and a
//! few-shot LLM evaluation loop whose responses are grounded back onto token spans.

pub mod ingest;
pub mod llm;
pub mod model;
pub mod scorer;
pub mod splitter;

pub use model::{AnnotatedInstance, Argument, DatasetProfile, EventMention, Instance, ModelError, Span, TaskKind};
