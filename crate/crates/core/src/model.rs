//! Canonical annotation types shared by every stage of the harness.
//!
//! Spans are half-open token intervals. Character offsets are counted in
//! Unicode scalar values (not bytes), so corpora produced by Python tooling
//! round-trip unchanged.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("span ({start}, {end}) must satisfy start < end")]
    EmptySpan { start: usize, end: usize },
    #[error("span ({start}, {end}) exceeds token count {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("{tokens} tokens but {offsets} char offsets")]
    OffsetCountMismatch { tokens: usize, offsets: usize },
    #[error("char offsets of token {index} are not strictly increasing or overlap the previous token")]
    OffsetsNotIncreasing { index: usize },
    #[error("char offsets of token {index} ({start}, {end}) exceed text length {len}")]
    OffsetBeyondText { index: usize, start: usize, end: usize, len: usize },
    #[error("text at char offsets of token {index} is {found:?}, expected {expected:?}")]
    TokenTextMismatch { index: usize, expected: String, found: String },
    #[error("event type must be nonempty")]
    EmptyEventType,
}

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    start: usize,
    end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Result<Self, ModelError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(ModelError::EmptySpan { start, end })
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    /// Number of tokens covered; always at least 1.
    pub fn width(&self) -> usize {
        self.end - self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Moves the span left by `offset` tokens. Caller guarantees `offset <= start`.
    pub(crate) fn shift_left(&self, offset: usize) -> Span {
        Span { start: self.start - offset, end: self.end - offset }
    }

    pub fn check_bounds(&self, len: usize) -> Result<(), ModelError> {
        if self.end > len {
            Err(ModelError::SpanOutOfBounds { start: self.start, end: self.end, len })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.start, self.end)
    }
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.start, self.end).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (start, end) = <(usize, usize)>::deserialize(deserializer)?;
        Span::new(start, end).map_err(D::Error::custom)
    }
}

/// One evaluable text unit with its token/character alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    instance_id: String,
    doc_id: String,
    window_index: usize,
    tokens: Vec<String>,
    text: String,
    char_offsets: Vec<(usize, usize)>,
    // byte offsets mirroring char_offsets, for slicing `text`
    byte_offsets: Vec<(usize, usize)>,
    // byte position of every char boundary, len = char count + 1
    char_to_byte: Vec<usize>,
}

impl Instance {
    pub fn new(
        instance_id: impl Into<String>,
        doc_id: impl Into<String>,
        window_index: usize,
        tokens: Vec<String>,
        text: impl Into<String>,
        char_offsets: Vec<(usize, usize)>,
    ) -> Result<Self, ModelError> {
        let text = text.into();
        if tokens.len() != char_offsets.len() {
            return Err(ModelError::OffsetCountMismatch {
                tokens: tokens.len(),
                offsets: char_offsets.len(),
            });
        }
        let char_to_byte: Vec<usize> = text
            .char_indices()
            .map(|(b, _)| b)
            .chain(std::iter::once(text.len()))
            .collect();
        let n_chars = char_to_byte.len() - 1;

        let mut byte_offsets = Vec::with_capacity(char_offsets.len());
        let mut prev_end = 0usize;
        for (index, (&(start, end), token)) in char_offsets.iter().zip(&tokens).enumerate() {
            if start >= end || (index > 0 && start < prev_end) {
                return Err(ModelError::OffsetsNotIncreasing { index });
            }
            if end > n_chars {
                return Err(ModelError::OffsetBeyondText { index, start, end, len: n_chars });
            }
            let (bs, be) = (char_to_byte[start], char_to_byte[end]);
            let found = &text[bs..be];
            if found != token {
                return Err(ModelError::TokenTextMismatch {
                    index,
                    expected: token.clone(),
                    found: found.to_string(),
                });
            }
            byte_offsets.push((bs, be));
            prev_end = end;
        }

        Ok(Self {
            instance_id: instance_id.into(),
            doc_id: doc_id.into(),
            window_index,
            tokens,
            text,
            char_offsets,
            byte_offsets,
            char_to_byte,
        })
    }

    pub fn instance_id(&self) -> &str {
        &self.instance_id
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn window_index(&self) -> usize {
        self.window_index
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn char_offsets(&self) -> &[(usize, usize)] {
        &self.char_offsets
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of characters (not bytes) in `text`.
    pub fn char_len(&self) -> usize {
        self.char_to_byte.len() - 1
    }

    pub(crate) fn byte_offsets(&self) -> &[(usize, usize)] {
        &self.byte_offsets
    }

    /// Raw text covered by a token span, including any characters between its tokens.
    pub fn span_text(&self, span: Span) -> Result<&str, ModelError> {
        span.check_bounds(self.len())?;
        let start = self.byte_offsets[span.start].0;
        let end = self.byte_offsets[span.end - 1].1;
        Ok(&self.text[start..end])
    }

    /// Character extent `[start, end)` of a token span.
    pub fn span_chars(&self, span: Span) -> Result<(usize, usize), ModelError> {
        span.check_bounds(self.len())?;
        Ok((self.char_offsets[span.start].0, self.char_offsets[span.end - 1].1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Argument {
    pub span: Span,
    pub role: String,
}

impl Argument {
    pub fn new(span: Span, role: impl Into<String>) -> Self {
        Self { span, role: role.into() }
    }
}

/// A trigger with its event type and attached arguments.
///
/// Argument spans may overlap each other or the trigger; nothing is filtered here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventMention {
    pub trigger: Span,
    pub event_type: String,
    #[serde(default)]
    pub arguments: Vec<Argument>,
}

impl EventMention {
    pub fn new(trigger: Span, event_type: impl Into<String>, arguments: Vec<Argument>) -> Self {
        Self { trigger, event_type: event_type.into(), arguments }
    }

    pub fn validate(&self, n_tokens: usize) -> Result<(), ModelError> {
        if self.event_type.is_empty() {
            return Err(ModelError::EmptyEventType);
        }
        self.trigger.check_bounds(n_tokens)?;
        for arg in &self.arguments {
            arg.span.check_bounds(n_tokens)?;
        }
        Ok(())
    }

    /// Smallest span covering the trigger and every argument.
    pub fn extent(&self) -> Span {
        let start = self
            .arguments
            .iter()
            .map(|a| a.span.start)
            .fold(self.trigger.start, usize::min);
        let end = self
            .arguments
            .iter()
            .map(|a| a.span.end)
            .fold(self.trigger.end, usize::max);
        Span { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum TaskKind {
    /// Triggers and arguments.
    #[default]
    E2E,
    /// Event detection: triggers only.
    ED,
    /// Argument extraction given gold triggers.
    EAE,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::E2E => "E2E",
            TaskKind::ED => "ED",
            TaskKind::EAE => "EAE",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "E2E" => Ok(TaskKind::E2E),
            "ED" => Ok(TaskKind::ED),
            "EAE" => Ok(TaskKind::EAE),
            other => Err(format!("unknown task {other:?}, expected E2E, ED or EAE")),
        }
    }
}

/// An instance together with its gold events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedInstance {
    instance: Instance,
    events: Vec<EventMention>,
    task: TaskKind,
}

impl AnnotatedInstance {
    pub fn new(instance: Instance, events: Vec<EventMention>, task: TaskKind) -> Result<Self, ModelError> {
        for event in &events {
            event.validate(instance.len())?;
        }
        Ok(Self { instance, events, task })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn events(&self) -> &[EventMention] {
        &self.events
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn id(&self) -> &str {
        self.instance.instance_id()
    }

    pub fn doc_id(&self) -> &str {
        self.instance.doc_id()
    }

    pub fn with_task(mut self, task: TaskKind) -> Self {
        self.task = task;
        self
    }

    /// Events as the scorer sees them: ED instances carry no arguments.
    pub fn scoring_events(&self) -> Vec<EventMention> {
        match self.task {
            TaskKind::ED => self
                .events
                .iter()
                .map(|e| EventMention::new(e.trigger, e.event_type.clone(), Vec::new()))
                .collect(),
            _ => self.events.clone(),
        }
    }
}

/// Corpus-level counts in the layout of a dataset statistics table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n_docs: usize,
    pub n_instances: usize,
    pub n_event_types: usize,
    pub n_events: usize,
    pub n_role_types: usize,
    pub n_arguments: usize,
    pub event_type_set: std::collections::BTreeSet<String>,
    pub role_type_set: std::collections::BTreeSet<String>,
}
