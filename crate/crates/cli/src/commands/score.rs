use std::collections::{BTreeSet, HashMap};

use anyhow::Context;
use eebench::ingest::parse_predictions;
use eebench::scorer::{markdown_split_table, markdown_table, score_split, MetricKind, MetricReport};
use eebench::{AnnotatedInstance, EventMention, TaskKind};

use super::{load_corpus, load_splits, open, out_dir};
use crate::cli::Opts;
use crate::config::{require, Settings};
use crate::exit::{input_error, CliResult, ResultExt};
use crate::manifest::{write_json, RunManifest};

pub fn render_markdown(report: &MetricReport) -> String {
    let name = report.system.as_deref().unwrap_or("system");
    let metrics: Vec<MetricKind> = report.mean.keys().copied().collect();
    format!(
        "# {} ({}, mean of {} split(s))\n\n{}\n## Per split\n\n{}",
        report.dataset,
        report.task,
        report.splits.len(),
        markdown_table(&[(name, report)], &metrics),
        markdown_split_table(report)
    )
}

pub fn run(opts: &Opts) -> CliResult {
    let settings = Settings::resolve(opts)?;
    let corpus = require(&opts.corpus, "corpus")?;
    let pred_path = require(&opts.pred, "pred")?;
    let task = settings.task.unwrap_or(TaskKind::E2E);
    let dir = out_dir(&opts.out_dir)?;

    let data = load_corpus(corpus)?;
    let records = parse_predictions(open(pred_path)?).with_context(|| format!("in {}", pred_path.display())).input()?;
    let known: BTreeSet<&str> = data.iter().map(AnnotatedInstance::id).collect();
    let unknown: Vec<&str> = records.iter().map(|r| r.instance_id.as_str()).filter(|id| !known.contains(id)).collect();
    if !unknown.is_empty() {
        return Err(input_error(format!(
            "{} prediction instance id(s) not in the corpus: {}",
            unknown.len(),
            unknown.join(", ")
        )));
    }
    let predictions: HashMap<String, Vec<EventMention>> = records.into_iter().map(|r| (r.instance_id, r.events)).collect();

    // without split files the whole corpus is one test set
    let parts: Vec<(usize, Option<BTreeSet<String>>)> = match &opts.splits {
        Some(path) => load_splits(path)?.into_iter().map(|s| (s.split_id, Some(s.test))).collect(),
        None => vec![(0, None)],
    };
    let mut reports = Vec::with_capacity(parts.len());
    for (split_id, test_docs) in &parts {
        let gold: Vec<&AnnotatedInstance> = data
            .iter()
            .filter(|d| test_docs.as_ref().is_none_or(|t| t.contains(d.doc_id())))
            .collect();
        reports.push(score_split(*split_id, &gold, &predictions, task, MetricKind::for_task(task)).input()?);
    }
    let dataset = settings.dataset.clone().unwrap_or_else(|| stem(corpus));
    let mut report = MetricReport::from_splits(dataset, task, reports).input()?;
    report.system = Some(settings.system.clone().unwrap_or_else(|| stem(pred_path)));

    write_json(&dir.join("report.json"), &report).input()?;
    std::fs::write(dir.join("report.md"), render_markdown(&report)).input()?;
    let mut manifest = RunManifest::new("score", &settings).input()?.input(corpus).input()?.input(pred_path).input()?;
    if let Some(s) = &opts.splits {
        manifest = manifest.input(s).input()?;
    }
    manifest.write(dir).input()?;

    let violations = report.eae_violation_count();
    if violations > 0 {
        eprintln!("{violations} predicted event(s) did not reuse a gold trigger and were excluded");
    }
    print!("{}", markdown_table(&[(report.system.as_deref().unwrap_or(""), &report)], MetricKind::for_task(task)));
    Ok(())
}

pub fn stem(path: &std::path::Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("unnamed").to_string()
}
