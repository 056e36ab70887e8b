//! Line-oriented JSON formats: corpus, predictions and raw documents.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::align::{align_char_span, AlignError};
use super::window::Document;
use crate::model::{AnnotatedInstance, Argument, EventMention, Instance, ModelError, Span, TaskKind};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: field `{field}`: {message}")]
    Invalid { line: usize, field: String, message: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Invalid { line, .. } | ParseError::DuplicateId { line, .. } => Some(*line),
            ParseError::Io(_) => None,
        }
    }
}

/// One corpus line, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub doc_id: String,
    #[serde(default)]
    pub window_index: usize,
    pub tokens: Vec<String>,
    pub text: String,
    pub char_offsets: Vec<(usize, usize)>,
    #[serde(default)]
    pub events: Vec<EventMention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
}

impl From<&AnnotatedInstance> for InstanceRecord {
    fn from(ai: &AnnotatedInstance) -> Self {
        let inst = ai.instance();
        InstanceRecord {
            instance_id: inst.instance_id().to_string(),
            doc_id: inst.doc_id().to_string(),
            window_index: inst.window_index(),
            tokens: inst.tokens().to_vec(),
            text: inst.text().to_string(),
            char_offsets: inst.char_offsets().to_vec(),
            events: ai.events().to_vec(),
            task: Some(ai.task()),
        }
    }
}

/// One prediction line: the events a system produced for an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    #[serde(default)]
    pub events: Vec<EventMention>,
}

fn invalid(line: usize, field: impl Into<String>, message: impl ToString) -> ParseError {
    ParseError::Invalid { line, field: field.into(), message: message.to_string() }
}

fn decode<T: for<'de> Deserialize<'de>>(line_no: usize, line: &str) -> Result<T, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let field = if path == "." { "<root>".to_string() } else { path };
        invalid(line_no, field, err.into_inner())
    })
}

fn model_field(err: &ModelError) -> String {
    match err {
        ModelError::OffsetCountMismatch { .. } => "char_offsets".into(),
        ModelError::OffsetsNotIncreasing { index } | ModelError::OffsetBeyondText { index, .. } => {
            format!("char_offsets[{index}]")
        }
        ModelError::TokenTextMismatch { index, .. } => format!("tokens[{index}]"),
        _ => "<root>".into(),
    }
}

fn validate_events(line: usize, events: &[EventMention], n_tokens: usize) -> Result<(), ParseError> {
    for (i, ev) in events.iter().enumerate() {
        if ev.event_type.is_empty() {
            return Err(invalid(line, format!("events[{i}].event_type"), ModelError::EmptyEventType));
        }
        ev.trigger
            .check_bounds(n_tokens)
            .map_err(|e| invalid(line, format!("events[{i}].trigger"), e))?;
        for (j, arg) in ev.arguments.iter().enumerate() {
            arg.span
                .check_bounds(n_tokens)
                .map_err(|e| invalid(line, format!("events[{i}].arguments[{j}].span"), e))?;
        }
    }
    Ok(())
}

impl InstanceRecord {
    pub fn into_annotated(self, line: usize) -> Result<AnnotatedInstance, ParseError> {
        let instance = Instance::new(
            self.instance_id,
            self.doc_id,
            self.window_index,
            self.tokens,
            self.text,
            self.char_offsets,
        )
        .map_err(|e| invalid(line, model_field(&e), e))?;
        validate_events(line, &self.events, instance.len())?;
        let task = self.task.unwrap_or_default();
        Ok(AnnotatedInstance::new(instance, self.events, task).expect("events validated"))
    }
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines<R: BufRead>(reader: R) -> Result<Vec<(usize, String)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_lines<R, T, F>(reader: R, convert: F) -> Result<Vec<T>, ParseError>
where
    R: BufRead,
    T: Send,
    F: Fn(usize, &str) -> Result<T, ParseError> + Sync,
{
    let lines = numbered_lines(reader)?;
    // parsed in parallel; the first failing line (by line number) is reported
    let parsed: Vec<Result<T, ParseError>> =
        lines.par_iter().map(|(no, line)| convert(*no, line)).collect();
    parsed.into_iter().collect()
}

/// Parses a corpus JSONL stream. Blank lines are skipped.
pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Vec<AnnotatedInstance>, ParseError> {
    let lines = numbered_lines(reader)?;
    let parsed: Vec<Result<(usize, AnnotatedInstance), ParseError>> = lines
        .par_iter()
        .map(|(no, line)| Ok((*no, decode::<InstanceRecord>(*no, line)?.into_annotated(*no)?)))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(parsed.len());
    for item in parsed {
        let (line, inst) = item?;
        if !seen.insert(inst.id().to_string()) {
            return Err(ParseError::DuplicateId { line, id: inst.id().to_string() });
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn write_dataset<W: Write>(mut writer: W, dataset: &[AnnotatedInstance]) -> std::io::Result<()> {
    for inst in dataset {
        serde_json::to_writer(&mut writer, &InstanceRecord::from(inst))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>, ParseError> {
    let lines = numbered_lines(reader)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lines.len());
    for (no, line) in lines {
        let rec: PredictionRecord = decode(no, &line)?;
        for (i, ev) in rec.events.iter().enumerate() {
            if ev.event_type.is_empty() {
                return Err(invalid(no, format!("events[{i}].event_type"), ModelError::EmptyEventType));
            }
        }
        if !seen.insert(rec.instance_id.clone()) {
            return Err(ParseError::DuplicateId { line: no, id: rec.instance_id });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_predictions<W: Write>(mut writer: W, preds: &[PredictionRecord]) -> std::io::Result<()> {
    for p in preds {
        serde_json::to_writer(&mut writer, p)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Raw document line accepted by the windowing step.
///
/// Annotations may be given as token spans (`trigger`, `span`) or as character spans
/// (`trigger_chars`, `span_chars`); character spans are aligned to tokens on load.
#[derive(Debug, Clone, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub text: String,
    pub char_offsets: Vec<(usize, usize)>,
    /// Exclusive token indices at which sentences end.
    #[serde(default)]
    pub sentence_ends: Option<Vec<usize>>,
    /// Per-token subtoken counts from an external subtokenizer.
    #[serde(default)]
    pub subtoken_counts: Option<Vec<usize>>,
    #[serde(default)]
    pub events: Vec<DocEventRecord>,
    #[serde(default)]
    pub task: Option<TaskKind>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DocEventRecord {
    #[serde(default)]
    pub trigger: Option<Span>,
    #[serde(default)]
    pub trigger_chars: Option<(usize, usize)>,
    pub event_type: String,
    #[serde(default)]
    pub arguments: Vec<DocArgumentRecord>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DocArgumentRecord {
    #[serde(default)]
    pub span: Option<Span>,
    #[serde(default)]
    pub span_chars: Option<(usize, usize)>,
    pub role: String,
}

/// Tally of character-to-token alignment while loading documents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AlignmentSummary {
    pub aligned: usize,
    pub inexact: usize,
    /// Events dropped because their trigger touched no token.
    pub unaligned_events: usize,
    /// Arguments dropped because their span touched no token.
    pub unaligned_arguments: usize,
}

fn resolve_span(
    line: usize,
    field: &str,
    instance: &Instance,
    span: Option<Span>,
    chars: Option<(usize, usize)>,
    summary: &mut AlignmentSummary,
) -> Result<Option<Span>, ParseError> {
    match (span, chars) {
        (Some(s), None) => {
            s.check_bounds(instance.len()).map_err(|e| invalid(line, field, e))?;
            Ok(Some(s))
        }
        (None, Some((cs, ce))) => match align_char_span(instance, cs, ce) {
            Ok(outcome) => {
                summary.aligned += 1;
                if !outcome.exact {
                    summary.inexact += 1;
                }
                Ok(Some(outcome.span))
            }
            Err(AlignError::NoCoveringToken { .. }) => Ok(None),
            Err(e) => Err(invalid(line, format!("{field}_chars"), e)),
        },
        _ => Err(invalid(line, field, "exactly one of the token span or the char span must be given")),
    }
}

impl DocumentRecord {
    pub fn into_document(self, line: usize, summary: &mut AlignmentSummary) -> Result<Document, ParseError> {
        let instance = Instance::new(
            self.doc_id.clone(),
            self.doc_id,
            0,
            self.tokens,
            self.text,
            self.char_offsets,
        )
        .map_err(|e| invalid(line, model_field(&e), e))?;

        let mut events = Vec::with_capacity(self.events.len());
        for (i, ev) in self.events.into_iter().enumerate() {
            if ev.event_type.is_empty() {
                return Err(invalid(line, format!("events[{i}].event_type"), ModelError::EmptyEventType));
            }
            let trigger_field = format!("events[{i}].trigger");
            let Some(trigger) =
                resolve_span(line, &trigger_field, &instance, ev.trigger, ev.trigger_chars, summary)?
            else {
                summary.unaligned_events += 1;
                continue;
            };
            let mut arguments = Vec::with_capacity(ev.arguments.len());
            for (j, arg) in ev.arguments.into_iter().enumerate() {
                let field = format!("events[{i}].arguments[{j}].span");
                match resolve_span(line, &field, &instance, arg.span, arg.span_chars, summary)? {
                    Some(span) => arguments.push(Argument::new(span, arg.role)),
                    None => summary.unaligned_arguments += 1,
                }
            }
            events.push(EventMention::new(trigger, ev.event_type, arguments));
        }

        if let Some(ends) = &self.sentence_ends {
            if let Some(bad) = ends.iter().find(|&&e| e == 0 || e > instance.len()) {
                return Err(invalid(line, "sentence_ends", format!("boundary {bad} outside 1..={}", instance.len())));
            }
        }
        if let Some(counts) = &self.subtoken_counts {
            if counts.len() != instance.len() {
                return Err(invalid(line, "subtoken_counts", "length differs from token count"));
            }
            if counts.contains(&0) {
                return Err(invalid(line, "subtoken_counts", "counts must be positive"));
            }
        }

        Ok(Document {
            instance,
            events,
            task: self.task.unwrap_or_default(),
            sentence_ends: self.sentence_ends,
            subtoken_counts: self.subtoken_counts,
        })
    }
}

pub fn parse_documents<R: BufRead>(reader: R) -> Result<(Vec<Document>, AlignmentSummary), ParseError> {
    let records: Vec<(usize, DocumentRecord)> =
        parse_lines(reader, |no, line| Ok((no, decode::<DocumentRecord>(no, line)?)))?;
    let mut summary = AlignmentSummary::default();
    let mut seen = HashSet::new();
    let mut docs = Vec::with_capacity(records.len());
    for (no, rec) in records {
        if !seen.insert(rec.doc_id.clone()) {
            return Err(ParseError::DuplicateId { line: no, id: rec.doc_id });
        }
        docs.push(rec.into_document(no, &mut summary)?);
    }
    Ok((docs, summary))
}
