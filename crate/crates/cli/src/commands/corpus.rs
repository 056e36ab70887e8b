//! validate, stats and window.

use std::fs::File;
use std::io::BufWriter;

use anyhow::Context;
use eebench::ingest::{
    compute_stats, parse_documents, validate_assumptions, window_documents, write_dataset, WindowConfig,
    DEFAULT_SUBTOKEN_BUDGET,
};
use serde::Serialize;

use super::{load_corpus, open, out_dir};
use crate::cli::Opts;
use crate::config::{require, Settings};
use crate::exit::{CliResult, ExitKind, ResultExt};
use crate::manifest::{write_json, RunManifest};

fn print_json(value: &impl Serialize) -> CliResult {
    println!("{}", serde_json::to_string_pretty(value).input()?);
    Ok(())
}

pub fn validate(opts: &Opts) -> CliResult {
    let corpus = require(&opts.corpus, "corpus")?;
    let data = load_corpus(corpus)?;
    let report = validate_assumptions(&data);
    print_json(&report)?;
    if opts.out_dir.is_some() {
        let dir = out_dir(&opts.out_dir)?;
        write_json(&dir.join("compliance.json"), &report).input()?;
        RunManifest::new("validate", &Settings::default()).and_then(|m| m.input(corpus)).and_then(|m| m.write(dir)).input()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StatsOutput {
    profile: eebench::DatasetProfile,
    compliance: eebench::ingest::ComplianceReport,
}

pub fn stats(opts: &Opts) -> CliResult {
    let corpus = require(&opts.corpus, "corpus")?;
    let data = load_corpus(corpus)?;
    let out = StatsOutput { profile: compute_stats(&data), compliance: validate_assumptions(&data) };
    print_json(&out)?;
    if opts.out_dir.is_some() {
        let dir = out_dir(&opts.out_dir)?;
        write_json(&dir.join("stats.json"), &out).input()?;
        RunManifest::new("stats", &Settings::default()).and_then(|m| m.input(corpus)).and_then(|m| m.write(dir)).input()?;
    }
    Ok(())
}

pub fn window(opts: &Opts) -> CliResult {
    let settings = Settings::resolve(opts)?;
    let corpus = require(&opts.corpus, "corpus")?;
    let dir = out_dir(&opts.out_dir)?;
    let (docs, alignment) = parse_documents(open(corpus)?).with_context(|| format!("in {}", corpus.display())).input()?;
    let cfg = WindowConfig {
        subtoken_budget: settings.budget.unwrap_or(DEFAULT_SUBTOKEN_BUDGET),
        respect_sentence_boundaries: settings.respect_sentence_boundaries.unwrap_or(true),
        ..WindowConfig::default()
    };
    let windowed = window_documents(&docs, &cfg).or_exit(ExitKind::Infeasible)?;

    let path = dir.join("instances.jsonl");
    let file = File::create(&path).with_context(|| format!("creating {}", path.display())).input()?;
    write_dataset(BufWriter::new(file), &windowed.instances).input()?;
    #[derive(Serialize)]
    struct WindowOutput<'a> {
        counter: &'static str,
        subtoken_budget: usize,
        alignment: &'a eebench::ingest::AlignmentSummary,
        report: &'a eebench::ingest::WindowReport,
    }
    let out = WindowOutput { counter: cfg.counter.name(), subtoken_budget: cfg.subtoken_budget, alignment: &alignment, report: &windowed.report };
    write_json(&dir.join("window_report.json"), &out).input()?;
    RunManifest::new("window", &settings).and_then(|m| m.input(corpus)).and_then(|m| m.write(dir)).input()?;
    eprintln!(
        "{} documents -> {} windows; kept {} of {} events ({} dropped at window boundaries)",
        docs.len(),
        windowed.report.n_windows,
        windowed.report.kept_events,
        windowed.report.total_events,
        windowed.report.dropped_events
    );
    Ok(())
}
