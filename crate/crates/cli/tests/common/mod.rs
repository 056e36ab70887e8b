//! Fixtures shared by the CLI tests: corpora, split files and a mock chat endpoint.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use eebench::ingest::{instance_from_text, write_dataset};
use eebench::splitter::{PartProfiles, SplitAssignment};
use eebench::{AnnotatedInstance, Argument, EventMention, Span, TaskKind};
use serde_json::{json, Value};

pub fn eebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eebench"))
        .args(args)
        .env_remove("EEBENCH_API_KEY")
        .env_remove("OPENAI_API_KEY")
        .output()
        .expect("run eebench")
}

pub fn eebench_with_key(args: &[&str], key: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eebench")).args(args).env("EEBENCH_API_KEY", key).output().expect("run eebench")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn sp(s: usize, e: usize) -> Span {
    Span::new(s, e).unwrap()
}

const NAMES: [&str; 5] = ["Omar", "Lena", "Ravi", "Chen", "Ana"];
const PLACES: [&str; 5] = ["Kabul", "Herat", "Lyon", "Quito", "Oslo"];

/// Documents cycle through an attack plus an arrest, an arrest only, and no event.
pub fn event_corpus(prefix: &str, n: usize) -> Vec<AnnotatedInstance> {
    (0..n)
        .map(|i| {
            let (name, place) = (NAMES[i % 5], PLACES[(i + 2) % 5]);
            let (text, events) = match i % 3 {
                0 => (
                    format!("Rebels attacked the village near {place} , and police arrested {name} later ."),
                    vec![
                        EventMention::new(
                            sp(1, 2),
                            "Attack",
                            vec![Argument::new(sp(0, 1), "Attacker"), Argument::new(sp(3, 4), "Target"), Argument::new(sp(5, 6), "Place")],
                        ),
                        EventMention::new(sp(9, 10), "Arrest", vec![Argument::new(sp(8, 9), "Agent"), Argument::new(sp(10, 11), "Person")]),
                    ],
                ),
                1 => (
                    format!("Officers detained {name} in {place} on Monday ."),
                    vec![EventMention::new(
                        sp(1, 2),
                        "Arrest",
                        vec![Argument::new(sp(0, 1), "Agent"), Argument::new(sp(2, 3), "Person"), Argument::new(sp(4, 5), "Place")],
                    )],
                ),
                _ => (format!("{name} visited a museum in {place} ."), vec![]),
            };
            let inst = instance_from_text(format!("{prefix}{i}_0"), format!("{prefix}{i}"), 0, &text).unwrap();
            AnnotatedInstance::new(inst, events, TaskKind::E2E).unwrap()
        })
        .collect()
}

pub fn write_corpus(path: &Path, data: &[AnnotatedInstance]) {
    write_dataset(std::fs::File::create(path).unwrap(), data).unwrap();
}

pub fn write_split(path: &Path, train: &[AnnotatedInstance], test: &[AnnotatedInstance]) {
    let docs = |d: &[AnnotatedInstance]| d.iter().map(|i| i.doc_id().to_string()).collect::<BTreeSet<_>>();
    let split = SplitAssignment {
        split_id: 1,
        train: docs(train),
        dev: BTreeSet::new(),
        test: docs(test),
        discrepancy: 0.0,
        profiles: PartProfiles::default(),
    };
    std::fs::write(path, serde_json::to_string(&split).unwrap()).unwrap();
}

/// A 12-document demo pool and a 20-document evaluation set, written with a split file.
pub struct LlmFixture {
    pub dir: tempfile::TempDir,
    pub corpus: PathBuf,
    pub split: PathBuf,
    pub test: Vec<AnnotatedInstance>,
}

impl LlmFixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let train = event_corpus("train", 12);
        let test = event_corpus("test", 20);
        let corpus = dir.path().join("corpus.jsonl");
        let split = dir.path().join("split_1.json");
        write_corpus(&corpus, &train.iter().chain(&test).cloned().collect::<Vec<_>>());
        write_split(&split, &train, &test);
        Self { dir, corpus, split, test }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Answers from the gold annotation of the queried text.
    Oracle,
    AlwaysNo,
    /// Rejects every request with 401.
    RejectAll,
}

fn after<'a>(prompt: &'a str, marker: &str) -> &'a str {
    prompt.rfind(marker).map_or("", |i| &prompt[i + marker.len()..])
}

/// The answer a perfect model would give, read off the gold annotation.
pub fn oracle_answer(gold: &HashMap<String, AnnotatedInstance>, prompt: &str) -> String {
    if prompt.starts_with("You are an event extractor") {
        // fixture type names contain no dots or spaces
        let event_type = after(prompt, "The event of interest is ").split(['.', ' ']).next().unwrap_or_default();
        let text = after(prompt, "Question\nText: ").trim_end_matches("\nAnswer:");
        let Some(inst) = gold.get(text) else { return "No.".into() };
        match inst.events().iter().find(|e| e.event_type == event_type) {
            Some(ev) => format!("Yes, the event trigger is {} in the text.", inst.instance().span_text(ev.trigger).unwrap()),
            None => "No.".into(),
        }
    } else {
        let marked = after(prompt, "Question\nText: ");
        let text = marked.replace("[t] ", "").replace(" [/t]", "");
        let trigger = marked.split("[t] ").nth(1).and_then(|s| s.split(" [/t]").next()).unwrap_or_default();
        let roles = after(prompt, "Roles of interest: ").split("\n\n").next().unwrap_or_default();
        let ev = gold.get(&text).and_then(|inst| {
            inst.events().iter().find(|e| inst.instance().span_text(e.trigger).unwrap() == trigger).map(|e| (inst, e))
        });
        roles
            .split(", ")
            .map(|r| {
                let v = ev.and_then(|(inst, e)| {
                    e.arguments.iter().find(|a| a.role == r).map(|a| inst.instance().span_text(a.span).unwrap())
                });
                format!("{r}: {}", v.unwrap_or(""))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone)]
struct ServerState {
    mode: Mode,
    gold: Arc<HashMap<String, AnnotatedInstance>>,
    hits: Arc<AtomicUsize>,
}

async fn chat(State(state): State<ServerState>, _headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    state.hits.fetch_add(1, Ordering::SeqCst);
    let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
    let content = match state.mode {
        Mode::RejectAll => return (StatusCode::UNAUTHORIZED, Json(json!({"error": {"message": "Incorrect API key provided"}}))),
        Mode::AlwaysNo => "No.".to_string(),
        Mode::Oracle => oracle_answer(&state.gold, prompt),
    };
    (StatusCode::OK, Json(json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})))
}

pub struct MockServer {
    pub base_url: String,
    pub hits: Arc<AtomicUsize>,
}

impl MockServer {
    /// Serves an OpenAI-compatible `/v1/chat/completions` on 127.0.0.1 from a background thread.
    pub fn start(mode: Mode, gold: &[AnnotatedInstance]) -> Self {
        let hits = Arc::new(AtomicUsize::new(0));
        let state = ServerState {
            mode,
            gold: Arc::new(gold.iter().map(|i| (i.instance().text().to_string(), i.clone())).collect()),
            hits: hits.clone(),
        };
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                let app = Router::new().route("/v1/chat/completions", post(chat)).with_state(state);
                axum::serve(listener, app).await.unwrap();
            });
        });
        let addr = rx.recv().unwrap();
        Self { base_url: format!("http://{addr}/v1"), hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
