//! llm-ed and llm-eae.

use std::fs::{self, File};
use std::io::BufWriter;
use std::time::Duration;

use anyhow::Context;
use eebench::ingest::write_predictions;
use eebench::llm::{run_eval, EvalConfig, EvalData, HttpChatClient, Ontology, PromptConfig, ResponseCache, RetryPolicy};
use eebench::{AnnotatedInstance, TaskKind};
use serde::Serialize;

use super::score::{render_markdown, stem};
use super::{load_corpus, load_splits, out_dir};
use crate::cli::Opts;
use crate::config::{require, Settings};
use crate::exit::{CliError, CliResult, ExitKind, ResultExt};
use crate::manifest::{write_json, RunManifest};

#[derive(Serialize)]
struct LlmConfig<'a> {
    task: TaskKind,
    split_id: usize,
    prompt: &'a PromptConfig,
    eval: &'a EvalConfig,
    ontology: Option<&'a std::path::Path>,
    cache_dir: Option<&'a std::path::Path>,
}

pub fn run(opts: &Opts, task: TaskKind) -> CliResult {
    let settings = Settings::resolve(opts)?;
    let corpus = require(&opts.corpus, "corpus")?;
    let splits_path = require(&opts.splits, "splits")?;
    let base_seed = settings.seed;
    let demo_seed = settings.demo_seed.or(base_seed);
    let sample_seed = settings.sample_seed.or(base_seed);
    let (Some(demo_seed), Some(sample_seed)) = (demo_seed, sample_seed) else {
        return Err(crate::exit::input_error("seeds are required (--seed, or demo_seed and sample_seed in the config)"));
    };
    let endpoint = require(&settings.endpoint, "endpoint")?.clone();
    let model = require(&settings.model, "model")?.clone();
    let dir = out_dir(&opts.out_dir)?;

    let prompt_cfg = PromptConfig {
        k_shot: settings.k_shot.unwrap_or(2),
        demo_seed,
        max_prompt_units: settings.max_prompt_units,
    };
    let mut eval_cfg = EvalConfig::new(sample_seed, endpoint, model);
    if let Some(n) = settings.sample_docs {
        eval_cfg.sample_docs = n;
    }
    if let Some(t) = settings.temperature {
        eval_cfg.temperature = t;
    }
    if let Some(n) = settings.max_in_flight {
        eval_cfg.max_in_flight = n;
    }
    eval_cfg.retry = settings.retry.unwrap_or_else(RetryPolicy::default);
    if let Some(t) = settings.request_timeout_secs {
        eval_cfg.request_timeout_secs = t;
    }

    let data = load_corpus(corpus)?;
    let split = load_splits(splits_path)?.into_iter().next().expect("load_splits never returns empty");
    let part = |docs: &std::collections::BTreeSet<String>| -> Vec<AnnotatedInstance> {
        data.iter().filter(|d| docs.contains(d.doc_id())).cloned().collect()
    };
    let (train, test) = (part(&split.train), part(&split.test));

    let ontology = match &settings.ontology {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
            serde_json::from_str::<Ontology>(&text).with_context(|| format!("parsing ontology {}", path.display())).input()?
        }
        None => Ontology::infer(&data),
    };
    let cache = match &settings.cache_dir {
        Some(d) => Some(ResponseCache::open(d).with_context(|| format!("opening cache {}", d.display())).input()?),
        None => None,
    };
    let client = HttpChatClient::new(&eval_cfg.endpoint, HttpChatClient::api_key_from_env(), Duration::from_secs(eval_cfg.request_timeout_secs))
        .input()?;

    let dataset = settings.dataset.clone().unwrap_or_else(|| stem(corpus));
    let eval_data = EvalData { dataset: &dataset, split_id: split.split_id, train: &train, eval: &test, ontology: &ontology };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().input()?;
    let mut out = runtime
        .block_on(run_eval(eval_data, task, &prompt_cfg, &eval_cfg, &client, cache.as_ref()))
        .or_exit(ExitKind::Infeasible)?;
    if let Some(system) = &settings.system {
        out.report.system = Some(system.clone());
    }

    let path = dir.join("predictions.jsonl");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display())).input()?;
    write_predictions(BufWriter::new(file), &out.predictions).input()?;
    write_json(&dir.join("report.json"), &out.report).input()?;
    fs::write(dir.join("report.md"), render_markdown(&out.report)).input()?;
    #[derive(Serialize)]
    struct Diagnostics<'a> {
        stats: &'a eebench::llm::RunStats,
        categories: &'a eebench::llm::ErrorReport,
        failures: &'a [eebench::llm::RequestFailure],
        warnings: &'a [String],
    }
    let diag = Diagnostics { stats: &out.stats, categories: &out.errors, failures: &out.failures, warnings: &out.warnings };
    write_json(&dir.join("errors.json"), &diag).input()?;

    let config = LlmConfig {
        task,
        split_id: split.split_id,
        prompt: &prompt_cfg,
        eval: &eval_cfg,
        ontology: settings.ontology.as_deref(),
        cache_dir: settings.cache_dir.as_deref(),
    };
    let mut manifest = RunManifest::new(if task == TaskKind::ED { "llm-ed" } else { "llm-eae" }, &config)
        .input()?
        .seed("demo_seed", demo_seed)
        .seed("sample_seed", sample_seed)
        .input(corpus)
        .input()?
        .input(splits_path)
        .input()?;
    if let Some(o) = &settings.ontology {
        manifest = manifest.input(o).input()?;
    }
    manifest.write(dir).input()?;

    let s = &out.stats;
    eprintln!(
        "{} prompts ({} unique): {} cached, {} network calls, {} failed; {} hallucinated spans filtered",
        s.prompts, s.unique_prompts, s.cache_hits, s.network_requests, s.failed_prompts, s.hallucinations_filtered
    );
    for f in out.failures.iter().take(5) {
        eprintln!("request failed for {} / {}: {}", f.instance_id, f.event_type, f.error);
    }
    let needed_network = s.unique_prompts - s.cache_hits;
    if needed_network > 0 && s.failed_prompts == needed_network {
        return Err(CliError {
            kind: ExitKind::Network,
            error: anyhow::anyhow!("all {} uncached requests failed after retries", needed_network),
        });
    }
    Ok(())
}
