//! Diagnostic buckets for LLM predictions. These never feed back into scores.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{EventMention, Instance, Span};

/// Token-Jaccard above which an ungroundable answer is treated as a paraphrase.
pub const PARAPHRASE_JACCARD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    Correct,
    /// A spurious prediction, typically an event type absent from the instance.
    OverAggressive,
    /// Overlaps a gold span of the same type (and role) with different boundaries.
    BoundaryMismatch,
    /// The generated string does not occur in the text.
    Hallucination,
    /// Ungroundable, but close to some gold span's wording.
    Paraphrase,
    /// A gold item no prediction matched or overlapped.
    Miss,
}

/// Where a prediction landed in the text, or the string that could not be found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictedLocation {
    Span(Span),
    Ungrounded(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictedItem {
    Trigger { event_type: String, location: PredictedLocation },
    Argument { event_type: String, trigger: Span, role: String, location: PredictedLocation },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorizedItem {
    pub category: ErrorCategory,
    pub instance_id: String,
    pub event_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub counts: BTreeMap<ErrorCategory, usize>,
    pub items: Vec<CategorizedItem>,
}

impl ErrorReport {
    pub fn count(&self, category: ErrorCategory) -> usize {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    fn push(&mut self, item: CategorizedItem) {
        *self.counts.entry(item.category).or_default() += 1;
        self.items.push(item);
    }

    pub fn merge(&mut self, other: ErrorReport) {
        for item in other.items {
            self.push(item);
        }
    }
}

/// Whether gold is compared at trigger or at argument level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    Trigger,
    Argument,
}

/// Gold unit at trigger or argument granularity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GoldUnit<'a> {
    span: Span,
    event_type: &'a str,
    trigger: Option<Span>,
    role: Option<&'a str>,
}

impl GoldUnit<'_> {
    /// Same slot (type, and for arguments trigger and role) regardless of span.
    fn same_slot(&self, event_type: &str, trigger: Option<Span>, role: Option<&str>) -> bool {
        self.event_type == event_type && self.trigger == trigger && self.role == role
    }
}

fn folded_tokens(s: &str) -> HashSet<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// Buckets every prediction of one instance and then every unmatched gold item.
///
/// At trigger granularity gold triggers are the units; at argument granularity gold
/// arguments keyed by type, attached trigger and role. A gold unit counts as a miss only
/// when no prediction matched it exactly or overlapped it.
pub fn categorize(
    instance: &Instance,
    gold: &[EventMention],
    predictions: &[PredictedItem],
    granularity: Granularity,
) -> ErrorReport {
    let argument_level = granularity == Granularity::Argument;
    let mut units: Vec<GoldUnit> = Vec::new();
    for ev in gold {
        if argument_level {
            for arg in &ev.arguments {
                units.push(GoldUnit {
                    span: arg.span,
                    event_type: &ev.event_type,
                    trigger: Some(ev.trigger),
                    role: Some(&arg.role),
                });
            }
        } else {
            units.push(GoldUnit { span: ev.trigger, event_type: &ev.event_type, trigger: None, role: None });
        }
    }
    let mut seen = HashSet::new();
    units.retain(|u| seen.insert(u.clone()));

    let text_of = |span: Span| instance.span_text(span).ok().map(str::to_string);
    let mut accounted = vec![false; units.len()];
    let mut report = ErrorReport::default();

    for pred in predictions {
        let (event_type, trigger, role, location) = match pred {
            PredictedItem::Trigger { event_type, location } => (event_type, None, None, location),
            PredictedItem::Argument { event_type, trigger, role, location } => {
                (event_type, Some(*trigger), Some(role.as_str()), location)
            }
        };
        let mut item = CategorizedItem {
            category: ErrorCategory::OverAggressive,
            instance_id: instance.instance_id().to_string(),
            event_type: event_type.clone(),
            role: role.map(str::to_string),
            predicted: None,
            gold: None,
        };
        match location {
            PredictedLocation::Ungrounded(candidate) => {
                let cand = folded_tokens(candidate);
                let best = units
                    .iter()
                    .filter_map(|u| text_of(u.span))
                    .map(|g| (jaccard(&cand, &folded_tokens(&g)), g))
                    .max_by(|a, b| a.0.total_cmp(&b.0));
                item.predicted = Some(candidate.clone());
                match best {
                    Some((score, g)) if score > PARAPHRASE_JACCARD => {
                        item.category = ErrorCategory::Paraphrase;
                        item.gold = Some(g);
                    }
                    _ => item.category = ErrorCategory::Hallucination,
                }
            }
            PredictedLocation::Span(span) => {
                item.predicted = text_of(*span);
                let slot = |u: &GoldUnit| u.same_slot(event_type, trigger, role);
                if let Some(i) = units.iter().position(|u| u.span == *span && slot(u)) {
                    item.category = ErrorCategory::Correct;
                    accounted[i] = true;
                } else if let Some(i) = units.iter().position(|u| u.span.overlaps(span) && slot(u)) {
                    item.category = ErrorCategory::BoundaryMismatch;
                    item.gold = text_of(units[i].span);
                    accounted[i] = true;
                }
            }
        }
        report.push(item);
    }

    for (unit, done) in units.iter().zip(accounted) {
        if !done {
            report.push(CategorizedItem {
                category: ErrorCategory::Miss,
                instance_id: instance.instance_id().to_string(),
                event_type: unit.event_type.to_string(),
                role: unit.role.map(str::to_string),
                predicted: None,
                gold: text_of(unit.span),
            });
        }
    }
    report
}
