use std::fmt::Write;

use super::{MetricKind, MetricReport};

fn header(out: &mut String, first: &str, metrics: &[MetricKind]) {
    let _ = write!(out, "| {first} |");
    for m in metrics {
        let _ = write!(out, " {m} |");
    }
    out.push_str("\n|---|");
    for _ in metrics {
        out.push_str("---:|");
    }
    out.push('\n');
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "--".to_string(), |v| format!("{:.1}", v * 100.0))
}

/// One row per system, mean F1 (×100) per metric; `--` where a system lacks the metric.
pub fn markdown_table(rows: &[(&str, &MetricReport)], metrics: &[MetricKind]) -> String {
    let mut out = String::new();
    header(&mut out, "Model", metrics);
    for (name, report) in rows {
        let _ = write!(out, "| {name} |");
        for m in metrics {
            let _ = write!(out, " {} |", cell(report.mean.get(m).map(|p| p.f1)));
        }
        out.push('\n');
    }
    out
}

/// F1 per split plus the mean row for a single report.
pub fn markdown_split_table(report: &MetricReport) -> String {
    let metrics: Vec<MetricKind> = report.mean.keys().copied().collect();
    let mut out = String::new();
    header(&mut out, "Split", &metrics);
    for split in &report.splits {
        let _ = write!(out, "| {} |", split.split_id);
        for m in &metrics {
            let _ = write!(out, " {} |", cell(split.metrics.get(m).map(|s| s.prf.f1)));
        }
        out.push('\n');
    }
    out.push_str("| mean |");
    for m in &metrics {
        let _ = write!(out, " {} |", cell(report.mean.get(m).map(|p| p.f1)));
    }
    out.push('\n');
    out
}
