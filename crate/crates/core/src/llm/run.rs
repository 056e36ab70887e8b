//! End-to-end few-shot evaluation: sample, prompt, query, ground, score, categorize.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use futures::stream::{self, StreamExt};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cache::{cache_key, ResponseCache};
use super::categorize::{categorize, ErrorReport, Granularity, PredictedItem, PredictedLocation};
use super::client::{complete_with_retry, ChatBackend, ChatRequest, RetryPolicy};
use super::demos::{select_demos, select_eae_demos};
use super::ground::{ground_span, Grounding};
use super::parse::{parse_ed_response, parse_eae_response, EdDecision};
use super::prompt::{build_eae_prompt, build_ed_prompt, mark_trigger, EaeDemo, EdDemo, Prompt};
use crate::ingest::PredictionRecord;
use crate::model::{AnnotatedInstance, Argument, EventMention, ModelError, TaskKind};
use crate::scorer::{score_split, MetricKind, MetricReport, ScoreError};

pub const DEFAULT_SAMPLE_DOCS: usize = 250;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("LLM evaluation supports ED and EAE, not {0}")]
    UnsupportedTask(TaskKind),
    #[error("sample_docs must be at least 1")]
    ZeroSampleDocs,
    #[error("max_in_flight must be at least 1")]
    ZeroInFlight,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

fn default_k_shot() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptConfig {
    #[serde(default = "default_k_shot")]
    pub k_shot: usize,
    pub demo_seed: u64,
    /// Cap on prompt length in whitespace-separated units; demos are dropped oldest-first to fit.
    #[serde(default)]
    pub max_prompt_units: Option<usize>,
}

impl PromptConfig {
    pub fn new(k_shot: usize, demo_seed: u64) -> Self {
        Self { k_shot, demo_seed, max_prompt_units: None }
    }
}

fn default_sample_docs() -> usize {
    DEFAULT_SAMPLE_DOCS
}

fn default_in_flight() -> usize {
    8
}

fn default_timeout() -> u64 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    #[serde(default = "default_sample_docs")]
    pub sample_docs: usize,
    pub sample_seed: u64,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
}

impl EvalConfig {
    pub fn new(sample_seed: u64, endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            sample_docs: DEFAULT_SAMPLE_DOCS,
            sample_seed,
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: 0.0,
            max_in_flight: default_in_flight(),
            retry: RetryPolicy::default(),
            request_timeout_secs: default_timeout(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTypeInfo {
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub roles: Vec<String>,
}

/// Event types with their descriptions and roles. Serialized as a plain JSON object keyed
/// by event type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ontology {
    pub types: BTreeMap<String, EventTypeInfo>,
}

impl Ontology {
    /// Types and roles observed in annotations, roles sorted, descriptions empty.
    pub fn infer<'a>(instances: impl IntoIterator<Item = &'a AnnotatedInstance>) -> Self {
        let mut roles: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for inst in instances {
            for ev in inst.events() {
                let entry = roles.entry(ev.event_type.clone()).or_default();
                entry.extend(ev.arguments.iter().map(|a| a.role.clone()));
            }
        }
        let types = roles
            .into_iter()
            .map(|(t, r)| (t, EventTypeInfo { description: String::new(), roles: r.into_iter().collect() }))
            .collect();
        Self { types }
    }

    /// Adds types from `other` that are missing here; existing entries are left alone.
    pub fn fill_missing(&mut self, other: Ontology) {
        for (t, info) in other.types {
            self.types.entry(t).or_insert(info);
        }
    }

    pub fn roles(&self, event_type: &str) -> &[String] {
        self.types.get(event_type).map(|i| i.roles.as_slice()).unwrap_or(&[])
    }

    pub fn description(&self, event_type: &str) -> &str {
        self.types.get(event_type).map(|i| i.description.as_str()).unwrap_or("")
    }
}

/// Everything the evaluation reads besides configuration.
#[derive(Debug, Clone, Copy)]
pub struct EvalData<'a> {
    pub dataset: &'a str,
    pub split_id: usize,
    /// Demonstration pool.
    pub train: &'a [AnnotatedInstance],
    /// Instances to evaluate; documents are sampled from these.
    pub eval: &'a [AnnotatedInstance],
    pub ontology: &'a Ontology,
}

/// Picks `min(n, #docs)` document ids with a seeded RNG.
pub fn sample_documents(instances: &[AnnotatedInstance], n: usize, seed: u64) -> BTreeSet<String> {
    let docs: Vec<&str> = instances.iter().map(|i| i.doc_id()).collect::<BTreeSet<_>>().into_iter().collect();
    if n >= docs.len() {
        return docs.into_iter().map(str::to_string).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, docs.len(), n).into_iter().map(|i| docs[i].to_string()).collect()
}

/// One prompt to send, tied to the instance (and for EAE, the gold event) it asks about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedRequest {
    pub instance_index: usize,
    pub event_type: String,
    /// Index into the instance's gold events (EAE only).
    pub gold_event: Option<usize>,
    pub roles: Vec<String>,
    pub prompt: Prompt,
    /// Demos were dropped to respect the length cap.
    pub truncated: bool,
}

fn prompt_units(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Renders with all demos, then drops them from the front until the prompt fits.
fn fit_prompt<D>(demos: &[D], max_units: Option<usize>, render: impl Fn(&[D]) -> Prompt) -> (Prompt, bool) {
    let Some(max) = max_units else {
        return (render(demos), false);
    };
    for skip in 0..=demos.len() {
        let prompt = render(&demos[skip..]);
        if prompt_units(&prompt.text) <= max || skip == demos.len() {
            return (prompt, skip > 0);
        }
    }
    unreachable!("the loop returns on its last iteration")
}

fn first_text(inst: &AnnotatedInstance, span: crate::Span) -> Result<&str, ModelError> {
    inst.instance().span_text(span)
}

fn ed_demos(train: &[AnnotatedInstance], event_type: &str, cfg: &PromptConfig) -> Result<(Vec<EdDemo>, Vec<String>), ModelError> {
    let selection = select_demos(train, event_type, cfg.k_shot, cfg.demo_seed);
    let mut warnings = Vec::new();
    if selection.degraded {
        warnings.push(format!("{event_type}: no positive demonstrations available"));
    } else if selection.short {
        warnings.push(format!("{event_type}: fewer demonstrations than requested"));
    }
    let mut demos = Vec::with_capacity(selection.demos.len());
    for d in &selection.demos {
        let trigger = if d.positive {
            let ev = d.instance.events().iter().find(|e| e.event_type == event_type).expect("positive demo has the type");
            Some(first_text(d.instance, ev.trigger)?.to_string())
        } else {
            None
        };
        demos.push(EdDemo { text: d.instance.instance().text().to_string(), trigger });
    }
    Ok((demos, warnings))
}

fn eae_demos(
    train: &[AnnotatedInstance],
    event_type: &str,
    roles: &[String],
    cfg: &PromptConfig,
) -> Result<Vec<EaeDemo>, ModelError> {
    select_eae_demos(train, event_type, cfg.k_shot, cfg.demo_seed)
        .into_iter()
        .map(|(inst, ev)| {
            let mut answers = Vec::with_capacity(roles.len());
            for role in roles {
                let value = match ev.arguments.iter().find(|a| &a.role == role) {
                    Some(arg) => Some(first_text(inst, arg.span)?.to_string()),
                    None => None,
                };
                answers.push((role.clone(), value));
            }
            Ok(EaeDemo { marked_text: mark_trigger(inst.instance(), ev.trigger)?, answers })
        })
        .collect()
}

/// Builds every prompt of a run in a fixed order: instances in input order, then event
/// types in ontology order (ED) or gold events in annotation order (EAE).
pub fn build_prompts(
    train: &[AnnotatedInstance],
    eval: &[&AnnotatedInstance],
    ontology: &Ontology,
    task: TaskKind,
    cfg: &PromptConfig,
) -> Result<(Vec<PlannedRequest>, Vec<String>), EvalError> {
    let mut warnings = Vec::new();
    let mut planned = Vec::new();
    match task {
        TaskKind::ED => {
            let mut per_type = Vec::new();
            for (event_type, info) in &ontology.types {
                let (demos, w) = ed_demos(train, event_type, cfg)?;
                warnings.extend(w);
                per_type.push((event_type, info, demos));
            }
            for (idx, inst) in eval.iter().enumerate() {
                for (event_type, info, demos) in &per_type {
                    let text = inst.instance().text();
                    let (prompt, truncated) = fit_prompt(demos, cfg.max_prompt_units, |d| {
                        build_ed_prompt(event_type, &info.description, d, text)
                    });
                    planned.push(PlannedRequest {
                        instance_index: idx,
                        event_type: (*event_type).clone(),
                        gold_event: None,
                        roles: Vec::new(),
                        prompt,
                        truncated,
                    });
                }
            }
        }
        TaskKind::EAE => {
            let mut per_type: HashMap<&str, Vec<EaeDemo>> = HashMap::new();
            for (idx, inst) in eval.iter().enumerate() {
                for (ev_idx, ev) in inst.events().iter().enumerate() {
                    let roles = ontology.roles(&ev.event_type);
                    if roles.is_empty() {
                        warnings.push(format!("{}: event type {} has no roles; skipped", inst.id(), ev.event_type));
                        continue;
                    }
                    if !per_type.contains_key(ev.event_type.as_str()) {
                        per_type.insert(&ev.event_type, eae_demos(train, &ev.event_type, roles, cfg)?);
                    }
                    let demos = &per_type[ev.event_type.as_str()];
                    let query = mark_trigger(inst.instance(), ev.trigger)?;
                    let description = ontology.description(&ev.event_type);
                    let (prompt, truncated) = fit_prompt(demos, cfg.max_prompt_units, |d| {
                        build_eae_prompt(&ev.event_type, description, roles, d, &query)
                    });
                    planned.push(PlannedRequest {
                        instance_index: idx,
                        event_type: ev.event_type.clone(),
                        gold_event: Some(ev_idx),
                        roles: roles.to_vec(),
                        prompt,
                        truncated,
                    });
                }
            }
        }
        TaskKind::E2E => return Err(EvalError::UnsupportedTask(task)),
    }
    Ok((planned, warnings))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestFailure {
    pub instance_id: String,
    pub event_type: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub sampled_docs: usize,
    pub instances: usize,
    pub prompts: usize,
    pub unique_prompts: usize,
    pub cache_hits: usize,
    /// Calls made to the backend, retries included.
    pub network_requests: usize,
    /// Unique prompts that failed after all retries.
    pub failed_prompts: usize,
    /// Failed prompts over prompts that needed the backend.
    pub failure_rate: f64,
    pub unparseable_responses: usize,
    pub flagged_role_responses: usize,
    pub hallucinations_filtered: usize,
    pub truncated_prompts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub predictions: Vec<PredictionRecord>,
    pub report: MetricReport,
    pub errors: ErrorReport,
    pub stats: RunStats,
    pub failures: Vec<RequestFailure>,
    pub warnings: Vec<String>,
}

/// Runs one evaluation. Request failures never abort the run: the affected prompt yields
/// no prediction and is listed in `failures`.
pub async fn run_eval(
    data: EvalData<'_>,
    task: TaskKind,
    prompt_cfg: &PromptConfig,
    eval_cfg: &EvalConfig,
    backend: &dyn ChatBackend,
    cache: Option<&ResponseCache>,
) -> Result<EvalRun, EvalError> {
    if !matches!(task, TaskKind::ED | TaskKind::EAE) {
        return Err(EvalError::UnsupportedTask(task));
    }
    if eval_cfg.sample_docs == 0 {
        return Err(EvalError::ZeroSampleDocs);
    }
    if eval_cfg.max_in_flight == 0 {
        return Err(EvalError::ZeroInFlight);
    }

    let mut ontology = data.ontology.clone();
    ontology.fill_missing(Ontology::infer(data.train.iter().chain(data.eval)));

    let docs = sample_documents(data.eval, eval_cfg.sample_docs, eval_cfg.sample_seed);
    let sampled: Vec<&AnnotatedInstance> = data.eval.iter().filter(|i| docs.contains(i.doc_id())).collect();
    let (planned, mut warnings) = build_prompts(data.train, &sampled, &ontology, task, prompt_cfg)?;

    let mut stats = RunStats {
        sampled_docs: docs.len(),
        instances: sampled.len(),
        prompts: planned.len(),
        truncated_prompts: planned.iter().filter(|p| p.truncated).count(),
        ..RunStats::default()
    };
    for p in &planned {
        warnings.extend(p.prompt.warnings.iter().map(|w| format!("{} {}: {w}", sampled[p.instance_index].id(), p.event_type)));
    }

    let model = eval_cfg.model.as_str();
    let unique: BTreeMap<String, &str> =
        planned.iter().map(|p| (cache_key(model, &p.prompt.text), p.prompt.text.as_str())).collect();
    stats.unique_prompts = unique.len();

    let mut responses: HashMap<String, String> = HashMap::new();
    let mut pending = Vec::new();
    for (key, prompt) in &unique {
        match cache.and_then(|c| c.get(model, prompt)) {
            Some(hit) => {
                stats.cache_hits += 1;
                responses.insert(key.clone(), hit);
            }
            None => pending.push((key.clone(), *prompt)),
        }
    }

    let n_pending = pending.len();
    let outcomes: Vec<_> = stream::iter(pending)
        .map(|(key, prompt)| async move {
            let request = ChatRequest::user(model, prompt, eval_cfg.temperature);
            (key, prompt, complete_with_retry(backend, &request, &eval_cfg.retry).await)
        })
        .buffer_unordered(eval_cfg.max_in_flight)
        .collect()
        .await;

    let mut request_errors: HashMap<String, String> = HashMap::new();
    for (key, prompt, attempted) in outcomes {
        stats.network_requests += attempted.attempts as usize;
        match attempted.result {
            Ok(text) => {
                if let Some(c) = cache {
                    if let Err(e) = c.put(model, prompt, &text) {
                        warnings.push(format!("cache write failed for {key}: {e}"));
                    }
                }
                responses.insert(key, text);
            }
            Err(e) => {
                request_errors.insert(key, e.to_string());
            }
        }
    }
    stats.failed_prompts = request_errors.len();
    stats.failure_rate = if n_pending == 0 { 0.0 } else { request_errors.len() as f64 / n_pending as f64 };

    let mut predicted: Vec<Vec<EventMention>> = vec![Vec::new(); sampled.len()];
    let mut items: Vec<Vec<PredictedItem>> = vec![Vec::new(); sampled.len()];
    let mut failures = Vec::new();
    for p in &planned {
        let inst = sampled[p.instance_index];
        let key = cache_key(model, &p.prompt.text);
        let Some(raw) = responses.get(&key) else {
            failures.push(RequestFailure {
                instance_id: inst.id().to_string(),
                event_type: p.event_type.clone(),
                error: request_errors.get(&key).cloned().unwrap_or_default(),
            });
            continue;
        };
        match p.gold_event {
            None => {
                let parsed = parse_ed_response(raw);
                stats.unparseable_responses += usize::from(parsed.unparseable);
                if let (EdDecision::Yes, Some(trigger)) = (parsed.decision, parsed.trigger) {
                    let location = match ground_span(inst.instance(), &trigger) {
                        Grounding::Grounded(g) => {
                            predicted[p.instance_index].push(EventMention::new(g.span, p.event_type.clone(), vec![]));
                            PredictedLocation::Span(g.span)
                        }
                        Grounding::Hallucination => {
                            stats.hallucinations_filtered += 1;
                            PredictedLocation::Ungrounded(trigger)
                        }
                    };
                    items[p.instance_index].push(PredictedItem::Trigger { event_type: p.event_type.clone(), location });
                }
            }
            Some(ev_idx) => {
                let gold = &inst.events()[ev_idx];
                let parsed = parse_eae_response(raw, &p.roles);
                stats.flagged_role_responses += usize::from(parsed.is_flagged());
                let mut arguments = Vec::new();
                for (role, value) in parsed.values {
                    let Some(value) = value else { continue };
                    let location = match ground_span(inst.instance(), &value) {
                        Grounding::Grounded(g) => {
                            arguments.push(Argument::new(g.span, role.clone()));
                            PredictedLocation::Span(g.span)
                        }
                        Grounding::Hallucination => {
                            stats.hallucinations_filtered += 1;
                            PredictedLocation::Ungrounded(value)
                        }
                    };
                    items[p.instance_index].push(PredictedItem::Argument {
                        event_type: p.event_type.clone(),
                        trigger: gold.trigger,
                        role,
                        location,
                    });
                }
                predicted[p.instance_index].push(EventMention::new(gold.trigger, p.event_type.clone(), arguments));
            }
        }
    }

    let predictions: Vec<PredictionRecord> = sampled
        .iter()
        .zip(&predicted)
        .map(|(inst, events)| PredictionRecord { instance_id: inst.id().to_string(), events: events.clone() })
        .collect();
    let by_id: HashMap<String, Vec<EventMention>> =
        predictions.iter().map(|r| (r.instance_id.clone(), r.events.clone())).collect();
    let split = score_split(data.split_id, &sampled, &by_id, task, MetricKind::for_task(task))?;
    let report = MetricReport::from_splits(data.dataset, task, vec![split])?.with_system(model);

    let granularity = if task == TaskKind::EAE { Granularity::Argument } else { Granularity::Trigger };
    let mut errors = ErrorReport::default();
    for (inst, inst_items) in sampled.iter().zip(&items) {
        errors.merge(categorize(inst.instance(), inst.events(), inst_items, granularity));
    }

    Ok(EvalRun { predictions, report, errors, stats, failures, warnings })
}
