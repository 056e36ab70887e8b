//! Corpus I/O, character-to-token alignment, windowing and corpus statistics.

mod align;
mod jsonl;
mod stats;
mod tokenize;
mod window;

pub use align::{align_char_span, AlignError, AlignmentOutcome};
pub use jsonl::{
    parse_dataset, parse_documents, parse_predictions, write_dataset, write_predictions, AlignmentSummary,
    DocArgumentRecord, DocEventRecord, DocumentRecord, InstanceRecord, ParseError, PredictionRecord,
};
pub use stats::{compute_stats, validate_assumptions, ComplianceReport, LENGTH_CAPS};
pub use tokenize::{instance_from_text, whitespace_tokenize};
pub use window::{
    window_document, window_documents, Document, SubtokenCounter, TokenFlag, WindowConfig, WindowError,
    WindowReport, Windowed, DEFAULT_SUBTOKEN_BUDGET,
};
