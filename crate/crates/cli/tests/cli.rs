mod common;

use std::fs;

use common::*;
use eebench::ingest::{write_predictions, PredictionRecord};
use eebench::{EventMention, Span};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.jsonl");
    write_corpus(&good, &event_corpus("d", 4));
    let out = eebench(&["validate", "--corpus", p(&good)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_instances"], 4);

    let bad = dir.path().join("bad.jsonl");
    let mut text = fs::read_to_string(&good).unwrap();
    text = text.replacen("\"trigger\":[1,2]", "\"trigger\":[2,1]", 1);
    fs::write(&bad, text).unwrap();
    let out = eebench(&["validate", "--corpus", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = eebench(&["validate", "--corpus", p(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_instances"], 0);
    assert_eq!(report["n_events"], 0);
}

#[test]
fn split_sizes_determinism_and_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &event_corpus("doc", 10));
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = eebench(&["split", "--corpus", p(&corpus), "--seed", "3", "--ratios", "0.8/0.1/0.1", "--out-dir", p(&out_dir)]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for k in 1..=5 {
        let name = format!("split_{k}.json");
        let split = read_json(&a.join(&name));
        assert_eq!(split["train"].as_array().unwrap().len(), 8);
        assert_eq!(split["dev"].as_array().unwrap().len(), 1);
        assert_eq!(split["test"].as_array().unwrap().len(), 1);
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    let manifest = read_json(&a.join("manifest.json"));
    assert_eq!(manifest["seeds"]["seed"], 3);
    assert_eq!(manifest["objective"]["name"], "relative-deviation");
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);

    let tiny = dir.path().join("tiny.jsonl");
    write_corpus(&tiny, &event_corpus("doc", 2));
    let out = eebench(&["split", "--corpus", p(&tiny), "--seed", "1", "--out-dir", p(&dir.path().join("t"))]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let out = eebench(&["split", "--corpus", p(&corpus), "--out-dir", p(&dir.path().join("noseed"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn config_file_supplies_settings_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &event_corpus("doc", 10));
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 3, "ratios": "0.6/0.2/0.2", "k": 2}"#).unwrap();
    let out_dir = dir.path().join("o");
    let out = eebench(&["split", "--corpus", p(&corpus), "--config", p(&cfg), "--k", "3", "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out_dir.join("split_3.json").exists());
    assert!(!out_dir.join("split_4.json").exists());
    assert_eq!(read_json(&out_dir.join("split_1.json"))["train"].as_array().unwrap().len(), 6);

    fs::write(&cfg, r#"{"seed": 3, "bogus": 1}"#).unwrap();
    let out = eebench(&["split", "--corpus", p(&corpus), "--config", p(&cfg), "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
}

fn gold_predictions(data: &[eebench::AnnotatedInstance]) -> Vec<PredictionRecord> {
    data.iter().map(|d| PredictionRecord { instance_id: d.id().to_string(), events: d.events().to_vec() }).collect()
}

#[test]
fn score_identity_empty_and_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let data = event_corpus("doc", 10);
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &data);
    let splits = dir.path().join("splits");
    let out = eebench(&["split", "--corpus", p(&corpus), "--seed", "5", "--ratios", "0.6/0.2/0.2", "--out-dir", p(&splits)]);
    assert_eq!(out.status.code(), Some(0));

    let pred = dir.path().join("gold.jsonl");
    write_predictions(fs::File::create(&pred).unwrap(), &gold_predictions(&data)).unwrap();
    let out_dir = dir.path().join("perfect");
    let out = eebench(&["score", "--corpus", p(&corpus), "--pred", p(&pred), "--splits", p(&splits), "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["splits"].as_array().unwrap().len(), 5);
    for m in ["TI", "TC", "AI", "AC", "AI+", "AC+"] {
        assert_eq!(report["mean"][m]["f1"], 1.0, "{m}");
    }
    assert_eq!(report["conventions"]["dedupe"], "set");
    let md = fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.contains("| gold | 100.0 | 100.0 |"), "{md}");
    assert!(out_dir.join("manifest.json").exists());

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out_dir = dir.path().join("empty");
    let out = eebench(&["score", "--corpus", p(&corpus), "--pred", p(&empty), "--splits", p(&splits), "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&out_dir.join("report.json"));
    for m in ["TI", "TC", "AI", "AC", "AI+", "AC+"] {
        assert_eq!(report["mean"][m]["f1"], 0.0, "{m}");
    }

    let stray = dir.path().join("stray.jsonl");
    let mut preds = gold_predictions(&data);
    preds.push(PredictionRecord { instance_id: "ghost_7".into(), events: vec![] });
    write_predictions(fs::File::create(&stray).unwrap(), &preds).unwrap();
    let out = eebench(&["score", "--corpus", p(&corpus), "--pred", p(&stray), "--out-dir", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ghost_7"));
}

#[test]
fn eae_novel_trigger_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let data = event_corpus("doc", 3);
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &data);
    let mut preds = gold_predictions(&data);
    preds[0].events.push(EventMention::new(Span::new(3, 4).unwrap(), "Attack", vec![]));
    let pred = dir.path().join("p.jsonl");
    write_predictions(fs::File::create(&pred).unwrap(), &preds).unwrap();
    let out_dir = dir.path().join("o");
    let out = eebench(&["score", "--corpus", p(&corpus), "--pred", p(&pred), "--task", "EAE", "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["splits"][0]["eae_violations"].as_array().unwrap().len(), 1);
    assert_eq!(report["mean"]["AC+"]["f1"], 1.0);
    assert!(report["mean"].get("TI").is_none());
}

#[test]
fn report_combines_systems() {
    let dir = tempfile::tempdir().unwrap();
    let data = event_corpus("doc", 6);
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &data);
    let pred = dir.path().join("oracle.jsonl");
    write_predictions(fs::File::create(&pred).unwrap(), &gold_predictions(&data)).unwrap();
    let empty = dir.path().join("none.jsonl");
    fs::write(&empty, "").unwrap();
    for (name, file) in [("a", &pred), ("b", &empty)] {
        let out = eebench(&["score", "--corpus", p(&corpus), "--pred", p(file), "--out-dir", p(&dir.path().join(name))]);
        assert_eq!(out.status.code(), Some(0));
    }
    let out = eebench(&["report", p(&dir.path().join("a/report.json")), p(&dir.path().join("b/report.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("| Model | TI | TC | AI | AC | AI+ | AC+ |"), "{table}");
    assert!(table.contains("| oracle | 100.0 |"));
    assert!(table.contains("| none | 0.0 |"));
}

#[test]
fn window_command_writes_instances() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs.jsonl");
    let text = "Police arrested Omar . Rebels attacked Kabul .";
    let line = serde_json::json!({
        "doc_id": "d1",
        "tokens": ["Police", "arrested", "Omar", ".", "Rebels", "attacked", "Kabul", "."],
        "text": text,
        "char_offsets": [[0, 6], [7, 15], [16, 20], [21, 22], [23, 29], [30, 38], [39, 44], [45, 46]],
        "sentence_ends": [4, 8],
        "events": [
            {"trigger": [1, 2], "event_type": "Arrest", "arguments": [{"span": [2, 3], "role": "Person"}]},
            {"trigger_chars": [30, 38], "event_type": "Attack", "arguments": [{"span_chars": [39, 44], "role": "Place"}]}
        ]
    });
    fs::write(&docs, format!("{line}\n")).unwrap();
    let out_dir = dir.path().join("w");
    let out = eebench(&["window", "--corpus", p(&docs), "--budget", "5", "--out-dir", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let instances = fs::read_to_string(out_dir.join("instances.jsonl")).unwrap();
    assert_eq!(instances.lines().count(), 2);
    let report = read_json(&out_dir.join("window_report.json"));
    assert_eq!(report["report"]["kept_events"], 2);
    assert_eq!(report["report"]["dropped_events"], 0);
    let out = eebench(&["validate", "--corpus", p(&out_dir.join("instances.jsonl"))]);
    assert_eq!(out.status.code(), Some(0));
}

fn fast_config(fx: &LlmFixture) -> std::path::PathBuf {
    let cfg = fx.path("llm.json");
    fs::write(&cfg, r#"{"seed": 11, "model": "mock", "k_shot": 2, "retry": {"max_attempts": 2, "backoff_base_ms": 1, "max_backoff_ms": 2}}"#).unwrap();
    cfg
}

#[test]
fn cached_rerun_works_offline() {
    let fx = LlmFixture::new();
    let server = MockServer::start(Mode::Oracle, &fx.test);
    let cfg = fast_config(&fx);
    let cache = fx.path("cache");
    let first = fx.path("first");
    let args = |endpoint: &str, out: &std::path::Path| {
        eebench(&[
            "llm-ed", "--corpus", p(&fx.corpus), "--splits", p(&fx.split), "--config", p(&cfg), "--endpoint", endpoint,
            "--cache-dir", p(&cache), "--out-dir", p(out),
        ])
    };
    let out = args(&server.base_url, &first);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(server.hits() > 0);
    let second = fx.path("second");
    let out = args("http://127.0.0.1:9/v1", &second);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(fs::read(first.join("predictions.jsonl")).unwrap(), fs::read(second.join("predictions.jsonl")).unwrap());
    let diag = read_json(&second.join("errors.json"));
    assert_eq!(diag["stats"]["network_requests"], 0);
    for f in ["predictions.jsonl", "report.json", "report.md", "errors.json", "manifest.json"] {
        assert!(second.join(f).exists(), "{f}");
    }
}

#[test]
fn rejected_key_is_surfaced_per_request() {
    let fx = LlmFixture::new();
    let server = MockServer::start(Mode::RejectAll, &fx.test);
    let cfg = fast_config(&fx);
    let out_dir = fx.path("o");
    let out = eebench_with_key(
        &["llm-eae", "--corpus", p(&fx.corpus), "--splits", p(&fx.split), "--config", p(&cfg), "--endpoint", &server.base_url, "--out-dir", p(&out_dir)],
        "sk-wrong",
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("authentication rejected"), "{}", stderr(&out));
    let diag = read_json(&out_dir.join("errors.json"));
    let failures = diag["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["error"].as_str().unwrap().contains("401")));
    // auth errors are not retried: one call per unique prompt
    assert_eq!(server.hits(), diag["stats"]["unique_prompts"].as_u64().unwrap() as usize);
}

#[test]
fn unreachable_endpoint_with_cold_cache_exits_3() {
    let fx = LlmFixture::new();
    let cfg = fast_config(&fx);
    let out = eebench(&[
        "llm-ed", "--corpus", p(&fx.corpus), "--splits", p(&fx.split), "--config", p(&cfg), "--endpoint", "http://127.0.0.1:9/v1",
        "--sample-docs", "3", "--out-dir", p(&fx.path("o")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}
