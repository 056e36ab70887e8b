use std::path::PathBuf;

use anyhow::Context;
use eebench::scorer::{markdown_table, MetricKind, MetricReport};

use super::score::stem;
use crate::cli::Opts;
use crate::exit::{input_error, CliResult, ResultExt};
use crate::manifest::RunManifest;

/// One markdown row per report, in the order given, with the union of their metrics.
pub fn run(opts: &Opts, paths: &[PathBuf]) -> CliResult {
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
        let report: MetricReport =
            serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display())).input()?;
        let name = report.system.clone().unwrap_or_else(|| stem(path));
        reports.push((name, report));
    }
    let datasets: std::collections::BTreeSet<&str> = reports.iter().map(|(_, r)| r.dataset.as_str()).collect();
    if datasets.len() > 1 {
        return Err(input_error(format!("reports cover different datasets: {datasets:?}")));
    }
    let metrics: Vec<MetricKind> =
        MetricKind::ALL.into_iter().filter(|m| reports.iter().any(|(_, r)| r.mean.contains_key(m))).collect();
    let rows: Vec<(&str, &MetricReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let table = markdown_table(&rows, &metrics);
    print!("{table}");
    if opts.out_dir.is_some() {
        let dir = super::out_dir(&opts.out_dir)?;
        std::fs::write(dir.join("report.md"), &table).input()?;
        let mut manifest = RunManifest::new("report", &paths).input()?;
        for p in paths {
            manifest = manifest.input(p).input()?;
        }
        manifest.write(dir).input()?;
    }
    Ok(())
}
