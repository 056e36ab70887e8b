//! Trigger and argument metrics as tuple-set matching with micro-averaged F1.
//!
//! Each metric projects events onto a set of [`MatchKey`]s. Counts are summed over
//! instances before precision and recall are taken, and split-level F1 is averaged
//! arithmetically across splits.

mod markdown;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotatedInstance, EventMention, Span, TaskKind};

pub use markdown::{markdown_split_table, markdown_table};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("metric {metric} is not defined for {task} data")]
    MetricNotApplicable { metric: MetricKind, task: TaskKind },
    #[error("split {split_id} reports metrics {found:?}, expected {expected:?}")]
    MismatchedMetrics { split_id: usize, expected: Vec<MetricKind>, found: Vec<MetricKind> },
    #[error("no split reports to aggregate")]
    NoSplits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    /// Trigger identification: (start, end).
    TI,
    /// Trigger classification: (start, end, type).
    TC,
    /// Argument identification: (start, end, type).
    AI,
    /// Argument classification: (start, end, type, role).
    AC,
    /// AI plus the attached trigger's offsets.
    #[serde(rename = "AI+")]
    AIPlus,
    /// AC plus the attached trigger's offsets.
    #[serde(rename = "AC+")]
    ACPlus,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] =
        [MetricKind::TI, MetricKind::TC, MetricKind::AI, MetricKind::AC, MetricKind::AIPlus, MetricKind::ACPlus];

    pub fn for_task(task: TaskKind) -> &'static [MetricKind] {
        match task {
            TaskKind::ED => &Self::ALL[..2],
            TaskKind::EAE => &Self::ALL[2..],
            TaskKind::E2E => &Self::ALL,
        }
    }

    pub fn is_argument_metric(&self) -> bool {
        !matches!(self, MetricKind::TI | MetricKind::TC)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::TI => "TI",
            MetricKind::TC => "TC",
            MetricKind::AI => "AI",
            MetricKind::AC => "AC",
            MetricKind::AIPlus => "AI+",
            MetricKind::ACPlus => "AC+",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Identity tuple of one trigger or argument under a metric.
///
/// Components a metric ignores are `None`, so keys of different metrics never collide
/// within one metric's set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchKey<'a> {
    pub start: usize,
    pub end: usize,
    pub event_type: Option<&'a str>,
    pub trigger: Option<(usize, usize)>,
    pub role: Option<&'a str>,
}

fn offsets(span: Span) -> (usize, usize) {
    (span.start(), span.end())
}

/// Projects events onto the key set of `metric`; duplicates collapse.
pub fn extract_keys(events: &[EventMention], metric: MetricKind) -> HashSet<MatchKey<'_>> {
    let mut keys = HashSet::new();
    for ev in events {
        let ty = Some(ev.event_type.as_str());
        let (ts, te) = offsets(ev.trigger);
        match metric {
            MetricKind::TI => {
                keys.insert(MatchKey { start: ts, end: te, event_type: None, trigger: None, role: None });
            }
            MetricKind::TC => {
                keys.insert(MatchKey { start: ts, end: te, event_type: ty, trigger: None, role: None });
            }
            _ => {
                for arg in &ev.arguments {
                    let (start, end) = offsets(arg.span);
                    let trigger = matches!(metric, MetricKind::AIPlus | MetricKind::ACPlus).then_some((ts, te));
                    let role = matches!(metric, MetricKind::AC | MetricKind::ACPlus).then_some(arg.role.as_str());
                    keys.insert(MatchKey { start, end, event_type: ty, trigger, role });
                }
            }
        }
    }
    keys
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCounts {
    pub matched: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl Add for MetricCounts {
    type Output = MetricCounts;

    fn add(self, rhs: Self) -> Self::Output {
        MetricCounts {
            matched: self.matched + rhs.matched,
            n_pred: self.n_pred + rhs.n_pred,
            n_gold: self.n_gold + rhs.n_gold,
        }
    }
}

impl AddAssign for MetricCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sum for MetricCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MetricCounts::default(), Add::add)
    }
}

pub fn score_instance(gold: &[EventMention], pred: &[EventMention], metric: MetricKind) -> MetricCounts {
    let gold_keys = extract_keys(gold, metric);
    let pred_keys = extract_keys(pred, metric);
    MetricCounts {
        matched: gold_keys.intersection(&pred_keys).count(),
        n_pred: pred_keys.len(),
        n_gold: gold_keys.len(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and F1 with every zero denominator yielding 0.
pub fn micro_f1(counts: MetricCounts) -> Prf {
    let precision = safe_div(counts.matched as f64, counts.n_pred as f64);
    let recall = safe_div(counts.matched as f64, counts.n_gold as f64);
    let f1 = safe_div(2.0 * precision * recall, precision + recall);
    Prf { precision, recall, f1 }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    #[serde(flatten)]
    pub prf: Prf,
    #[serde(flatten)]
    pub counts: MetricCounts,
}

impl From<MetricCounts> for MetricScore {
    fn from(counts: MetricCounts) -> Self {
        MetricScore { prf: micro_f1(counts), counts }
    }
}

/// Predicted event whose trigger and type do not echo any gold event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaeViolation {
    pub instance_id: String,
    pub trigger: Span,
    pub event_type: String,
}

/// Indices of predicted events whose `(trigger, event_type)` is absent from gold.
pub fn validate_eae_predictions(gold: &[EventMention], pred: &[EventMention]) -> Vec<usize> {
    let gold_triggers: HashSet<(Span, &str)> = gold.iter().map(|e| (e.trigger, e.event_type.as_str())).collect();
    pred.iter()
        .enumerate()
        .filter(|(_, e)| !gold_triggers.contains(&(e.trigger, e.event_type.as_str())))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split_id: usize,
    pub n_instances: usize,
    pub metrics: BTreeMap<MetricKind, MetricScore>,
    #[serde(default)]
    pub eae_violations: Vec<EaeViolation>,
}

/// Scores gold instances against predictions keyed by instance id.
///
/// Instances without predictions count as empty predictions. For EAE, predicted events
/// that do not reuse a gold trigger are excluded and listed as violations.
pub fn score_split(
    split_id: usize,
    gold: &[&AnnotatedInstance],
    predictions: &HashMap<String, Vec<EventMention>>,
    task: TaskKind,
    metrics: &[MetricKind],
) -> Result<SplitReport, ScoreError> {
    if task == TaskKind::ED {
        if let Some(&metric) = metrics.iter().find(|m| m.is_argument_metric()) {
            return Err(ScoreError::MetricNotApplicable { metric, task });
        }
    }

    let per_instance: Vec<(Vec<MetricCounts>, Vec<EaeViolation>)> = gold
        .par_iter()
        .map(|inst| {
            let gold_events = inst.scoring_events();
            let pred_events = predictions.get(inst.id()).map(Vec::as_slice).unwrap_or(&[]);
            let mut violations = Vec::new();
            let kept: Vec<EventMention> = if task == TaskKind::EAE {
                let bad = validate_eae_predictions(&gold_events, pred_events);
                violations.extend(bad.iter().map(|&i| EaeViolation {
                    instance_id: inst.id().to_string(),
                    trigger: pred_events[i].trigger,
                    event_type: pred_events[i].event_type.clone(),
                }));
                pred_events
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !bad.contains(i))
                    .map(|(_, e)| e.clone())
                    .collect()
            } else {
                pred_events.to_vec()
            };
            let counts = metrics.iter().map(|&m| score_instance(&gold_events, &kept, m)).collect();
            (counts, violations)
        })
        .collect();

    let mut totals = vec![MetricCounts::default(); metrics.len()];
    let mut eae_violations = Vec::new();
    for (counts, violations) in per_instance {
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
        eae_violations.extend(violations);
    }
    Ok(SplitReport {
        split_id,
        n_instances: gold.len(),
        metrics: metrics.iter().copied().zip(totals.into_iter().map(MetricScore::from)).collect(),
        eae_violations,
    })
}

/// Arithmetic mean of precision, recall and F1 of each metric over the splits.
pub fn aggregate_splits(splits: &[SplitReport]) -> Result<BTreeMap<MetricKind, Prf>, ScoreError> {
    let first = splits.first().ok_or(ScoreError::NoSplits)?;
    let expected: Vec<MetricKind> = first.metrics.keys().copied().collect();
    for split in splits {
        let found: Vec<MetricKind> = split.metrics.keys().copied().collect();
        if found != expected {
            return Err(ScoreError::MismatchedMetrics { split_id: split.split_id, expected, found });
        }
    }
    let k = splits.len() as f64;
    Ok(expected
        .into_iter()
        .map(|m| {
            let mut acc = Prf::default();
            for split in splits {
                let prf = split.metrics[&m].prf;
                acc.precision += prf.precision;
                acc.recall += prf.recall;
                acc.f1 += prf.f1;
            }
            (m, Prf { precision: acc.precision / k, recall: acc.recall / k, f1: acc.f1 / k })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub dedupe: String,
    pub zero_div: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self { dedupe: "set".into(), zero_div: "zero".into() }
    }
}

/// Per-split and mean scores for one system on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub splits: Vec<SplitReport>,
    pub mean: BTreeMap<MetricKind, Prf>,
    pub conventions: Conventions,
}

impl MetricReport {
    pub fn from_splits(
        dataset: impl Into<String>,
        task: TaskKind,
        splits: Vec<SplitReport>,
    ) -> Result<Self, ScoreError> {
        let mean = aggregate_splits(&splits)?;
        Ok(Self { dataset: dataset.into(), task, system: None, splits, mean, conventions: Conventions::default() })
    }

    pub fn with_system(mut self, system: impl Into<String>) -> Self {
        self.system = Some(system.into());
        self
    }

    pub fn eae_violation_count(&self) -> usize {
        self.splits.iter().map(|s| s.eae_violations.len()).sum()
    }
}
