//! Splitting long documents into instances under a subtoken budget.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::model::{AnnotatedInstance, EventMention, Instance, Span, TaskKind};

pub const DEFAULT_SUBTOKEN_BUDGET: usize = 480;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("subtoken budget must be at least 1")]
    ZeroBudget,
    #[error("document {doc_id}: token {token_index} has a subtoken count of 0")]
    ZeroCount { doc_id: String, token_index: usize },
}

/// How many subtokens a token costs against the window budget.
#[derive(Clone, Default)]
pub enum SubtokenCounter {
    /// Every token costs one subtoken.
    #[default]
    Unit,
    Custom(Arc<dyn Fn(&str) -> usize + Send + Sync>),
}

impl SubtokenCounter {
    pub fn custom(f: impl Fn(&str) -> usize + Send + Sync + 'static) -> Self {
        SubtokenCounter::Custom(Arc::new(f))
    }

    pub fn count(&self, token: &str) -> usize {
        match self {
            SubtokenCounter::Unit => 1,
            SubtokenCounter::Custom(f) => f(token),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SubtokenCounter::Unit => "unit",
            SubtokenCounter::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for SubtokenCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct WindowConfig {
    pub subtoken_budget: usize,
    pub counter: SubtokenCounter,
    /// Snap cuts back to sentence ends when the document carries them.
    pub respect_sentence_boundaries: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            subtoken_budget: DEFAULT_SUBTOKEN_BUDGET,
            counter: SubtokenCounter::Unit,
            respect_sentence_boundaries: true,
        }
    }
}

/// A whole document before windowing. Spans are document-level token indices.
#[derive(Debug, Clone)]
pub struct Document {
    pub instance: Instance,
    pub events: Vec<EventMention>,
    pub task: TaskKind,
    /// Exclusive token indices at which sentences end.
    pub sentence_ends: Option<Vec<usize>>,
    /// Subtoken counts supplied with the document; these take precedence over the counter.
    pub subtoken_counts: Option<Vec<usize>>,
}

impl Document {
    pub fn doc_id(&self) -> &str {
        self.instance.doc_id()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenFlag {
    pub doc_id: String,
    pub token_index: usize,
    pub subtokens: usize,
}

/// What windowing kept and what it had to drop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub dropped_events: usize,
    pub by_doc: BTreeMap<String, usize>,
    pub kept_events: usize,
    pub total_events: usize,
    pub n_windows: usize,
    /// Single tokens whose subtoken count exceeds the budget; each forms its own window.
    pub oversized_tokens: Vec<TokenFlag>,
    /// Cuts that had to split a sentence because it alone exceeded the budget.
    pub sentence_splits: Vec<TokenFlag>,
}

impl WindowReport {
    pub fn merge(&mut self, other: WindowReport) {
        self.dropped_events += other.dropped_events;
        for (doc, n) in other.by_doc {
            *self.by_doc.entry(doc).or_default() += n;
        }
        self.kept_events += other.kept_events;
        self.total_events += other.total_events;
        self.n_windows += other.n_windows;
        self.oversized_tokens.extend(other.oversized_tokens);
        self.sentence_splits.extend(other.sentence_splits);
    }
}

#[derive(Debug, Clone)]
pub struct Windowed {
    pub instances: Vec<AnnotatedInstance>,
    pub report: WindowReport,
}

fn token_counts(doc: &Document, cfg: &WindowConfig) -> Result<Vec<usize>, WindowError> {
    let counts: Vec<usize> = match &doc.subtoken_counts {
        Some(c) => c.clone(),
        None => doc.instance.tokens().iter().map(|t| cfg.counter.count(t)).collect(),
    };
    if let Some(token_index) = counts.iter().position(|&c| c == 0) {
        return Err(WindowError::ZeroCount { doc_id: doc.doc_id().to_string(), token_index });
    }
    Ok(counts)
}

/// Greedy left-to-right cut points as `(start, end)` token ranges.
fn cut_windows(
    doc: &Document,
    counts: &[usize],
    cfg: &WindowConfig,
    report: &mut WindowReport,
) -> Vec<(usize, usize)> {
    let n = counts.len();
    let budget = cfg.subtoken_budget;
    let sentence_ends: Option<&[usize]> = if cfg.respect_sentence_boundaries {
        doc.sentence_ends.as_deref()
    } else {
        None
    };
    let mut windows = Vec::new();
    let mut start = 0;
    while start < n {
        if counts[start] > budget {
            report.oversized_tokens.push(TokenFlag {
                doc_id: doc.doc_id().to_string(),
                token_index: start,
                subtokens: counts[start],
            });
            windows.push((start, start + 1));
            start += 1;
            continue;
        }
        let mut end = start;
        let mut used = 0;
        while end < n && used + counts[end] <= budget {
            used += counts[end];
            end += 1;
        }
        if end < n {
            if let Some(ends) = sentence_ends {
                if !ends.contains(&end) {
                    match ends.iter().copied().filter(|&b| start < b && b < end).max() {
                        Some(b) => end = b,
                        None => report.sentence_splits.push(TokenFlag {
                            doc_id: doc.doc_id().to_string(),
                            token_index: end,
                            subtokens: used,
                        }),
                    }
                }
            }
        }
        windows.push((start, end));
        start = end;
    }
    windows
}

fn window_instance(doc: &Document, index: usize, range: (usize, usize)) -> Instance {
    let inst = &doc.instance;
    let (start, end) = range;
    let offsets = inst.char_offsets();
    let byte_offsets = inst.byte_offsets();
    let (char_base, text) = if start < end {
        let text = &inst.text()[byte_offsets[start].0..byte_offsets[end - 1].1];
        (offsets[start].0, text.to_string())
    } else {
        (0, inst.text().to_string())
    };
    let local: Vec<(usize, usize)> =
        offsets[start..end].iter().map(|&(s, e)| (s - char_base, e - char_base)).collect();
    Instance::new(
        format!("{}_{}", inst.doc_id(), index),
        inst.doc_id(),
        index,
        inst.tokens()[start..end].to_vec(),
        text,
        local,
    )
    .expect("sub-window of a valid instance is valid")
}

/// Cuts one document into windows and reassigns events to them.
///
/// An event is kept only if its trigger and all of its arguments fall inside a single
/// window; otherwise it is dropped and counted in the report.
pub fn window_document(doc: &Document, cfg: &WindowConfig) -> Result<Windowed, WindowError> {
    if cfg.subtoken_budget == 0 {
        return Err(WindowError::ZeroBudget);
    }
    let counts = token_counts(doc, cfg)?;
    let mut report = WindowReport { total_events: doc.events.len(), ..Default::default() };

    let mut ranges = cut_windows(doc, &counts, cfg, &mut report);
    if ranges.is_empty() {
        // keep empty documents as one empty instance
        ranges.push((0, 0));
    }

    let mut per_window: Vec<Vec<EventMention>> = vec![Vec::new(); ranges.len()];
    for event in &doc.events {
        let extent = event.extent();
        let w = ranges.partition_point(|&(s, _)| s <= extent.start()).saturating_sub(1);
        let (ws, we) = ranges[w];
        if ws < we && Span::new(ws, we).expect("nonempty").contains(&extent) {
            let mut local = event.clone();
            local.trigger = local.trigger.shift_left(ws);
            for arg in &mut local.arguments {
                arg.span = arg.span.shift_left(ws);
            }
            per_window[w].push(local);
            report.kept_events += 1;
        } else {
            report.dropped_events += 1;
            *report.by_doc.entry(doc.doc_id().to_string()).or_default() += 1;
        }
    }

    let instances: Vec<AnnotatedInstance> = ranges
        .iter()
        .zip(per_window)
        .enumerate()
        .map(|(i, (&range, events))| {
            AnnotatedInstance::new(window_instance(doc, i, range), events, doc.task)
                .expect("window-local events are in bounds")
        })
        .collect();
    report.n_windows = instances.len();
    Ok(Windowed { instances, report })
}

pub fn window_documents(docs: &[Document], cfg: &WindowConfig) -> Result<Windowed, WindowError> {
    let mut instances = Vec::new();
    let mut report = WindowReport::default();
    for doc in docs {
        let w = window_document(doc, cfg)?;
        instances.extend(w.instances);
        report.merge(w.report);
    }
    Ok(Windowed { instances, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::tokenize::whitespace_tokenize;
    use crate::model::Argument;

    fn doc(n: usize, events: Vec<EventMention>, sentence_ends: Option<Vec<usize>>) -> Document {
        let text = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let (tokens, offsets) = whitespace_tokenize(&text);
        Document {
            instance: Instance::new("doc", "doc", 0, tokens, text, offsets).unwrap(),
            events,
            task: TaskKind::E2E,
            sentence_ends,
            subtoken_counts: None,
        }
    }

    fn span(s: usize, e: usize) -> Span {
        Span::new(s, e).unwrap()
    }

    #[test]
    fn greedy_fill_480_480_40() {
        let w = window_document(&doc(1000, vec![], None), &WindowConfig::default()).unwrap();
        let sizes: Vec<usize> = w.instances.iter().map(|i| i.instance().len()).collect();
        assert_eq!(sizes, vec![480, 480, 40]);
        assert_eq!(w.instances[1].instance().tokens()[0], "w480");
        assert_eq!(w.instances[2].instance().window_index(), 2);
    }

    #[test]
    fn event_crossing_boundary_is_dropped() {
        let crossing = EventMention::new(span(470, 471), "T", vec![Argument::new(span(485, 486), "r")]);
        let inside = EventMention::new(span(500, 501), "T", vec![Argument::new(span(490, 492), "r")]);
        let w = window_document(&doc(1000, vec![crossing, inside], None), &WindowConfig::default()).unwrap();
        assert_eq!(w.report.dropped_events, 1);
        assert_eq!(w.report.by_doc.get("doc"), Some(&1));
        assert_eq!(w.report.kept_events, 1);
        let kept = &w.instances[1].events()[0];
        assert_eq!(kept.trigger, span(20, 21));
        assert_eq!(kept.arguments[0].span, span(10, 12));
    }

    #[test]
    fn large_budget_is_identity() {
        let ev = EventMention::new(span(3, 5), "T", vec![]);
        let d = doc(50, vec![ev.clone()], None);
        let cfg = WindowConfig { subtoken_budget: 50, ..Default::default() };
        let w = window_document(&d, &cfg).unwrap();
        assert_eq!(w.instances.len(), 1);
        let only = w.instances[0].instance();
        assert_eq!(only.tokens(), d.instance.tokens());
        assert_eq!(only.text(), d.instance.text());
        assert_eq!(only.char_offsets(), d.instance.char_offsets());
        assert_eq!(w.instances[0].events(), &[ev]);
    }

    #[test]
    fn snaps_back_to_sentence_end() {
        let d = doc(10, vec![], Some(vec![3, 7, 10]));
        let cfg = WindowConfig { subtoken_budget: 5, ..Default::default() };
        let w = window_document(&d, &cfg).unwrap();
        let sizes: Vec<usize> = w.instances.iter().map(|i| i.instance().len()).collect();
        assert_eq!(sizes, vec![3, 4, 3]);
        assert!(w.report.sentence_splits.is_empty());
    }

    #[test]
    fn long_sentence_falls_back_to_hard_cut() {
        let d = doc(10, vec![], Some(vec![8, 10]));
        let cfg = WindowConfig { subtoken_budget: 5, ..Default::default() };
        let w = window_document(&d, &cfg).unwrap();
        let sizes: Vec<usize> = w.instances.iter().map(|i| i.instance().len()).collect();
        assert_eq!(sizes, vec![5, 5]);
        assert_eq!(w.report.sentence_splits.len(), 1);
        assert_eq!(w.report.sentence_splits[0].token_index, 5);
    }

    #[test]
    fn oversized_token_forms_own_window() {
        let mut d = doc(4, vec![], None);
        d.subtoken_counts = Some(vec![1, 9, 1, 1]);
        let cfg = WindowConfig { subtoken_budget: 3, ..Default::default() };
        let w = window_document(&d, &cfg).unwrap();
        let sizes: Vec<usize> = w.instances.iter().map(|i| i.instance().len()).collect();
        assert_eq!(sizes, vec![1, 1, 2]);
        assert_eq!(w.report.oversized_tokens.len(), 1);
        assert_eq!(w.report.oversized_tokens[0].token_index, 1);
    }

    #[test]
    fn custom_counter_and_zero_count() {
        let d = doc(6, vec![], None);
        let cfg = WindowConfig {
            subtoken_budget: 4,
            counter: SubtokenCounter::custom(|_| 2),
            respect_sentence_boundaries: false,
        };
        assert_eq!(window_document(&d, &cfg).unwrap().instances.len(), 3);
        let zero = WindowConfig { counter: SubtokenCounter::custom(|_| 0), ..cfg };
        assert!(matches!(window_document(&d, &zero), Err(WindowError::ZeroCount { token_index: 0, .. })));
    }

    #[test]
    fn empty_document_keeps_one_instance() {
        let w = window_document(&doc(0, vec![], None), &WindowConfig::default()).unwrap();
        assert_eq!(w.instances.len(), 1);
        assert!(w.instances[0].instance().is_empty());
    }
}
