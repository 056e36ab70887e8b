use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use eebench::TaskKind;

/// Event-extraction benchmark harness.
#[derive(Debug, Parser)]
#[command(name = "eebench", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus and report annotation-assumption compliance.
    Validate,
    /// Print dataset statistics.
    Stats,
    /// Window document-level JSONL into instances under a subtoken budget.
    Window,
    /// Generate balanced train/dev/test document splits.
    Split,
    /// Score predictions on the test part of each split.
    Score,
    /// Few-shot event detection with a chat model.
    LlmEd,
    /// Few-shot argument extraction with a chat model.
    LlmEae,
    /// Combine score reports into one markdown table.
    Report {
        /// report.json files, one row each.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

/// Flags shared by all subcommands. Everything except paths may also come from --config;
/// flags win over the config file.
#[derive(Debug, Default, Args)]
pub struct Opts {
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Prediction JSONL.
    #[arg(long, global = true)]
    pub pred: Option<PathBuf>,
    /// A split file or a directory of split_*.json files.
    #[arg(long, global = true)]
    pub splits: Option<PathBuf>,
    #[arg(long, global = true)]
    pub task: Option<TaskKind>,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible API, e.g. https://api.openai.com/v1.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// train/dev/test ratios, e.g. 0.8/0.1/0.1.
    #[arg(long, global = true)]
    pub ratios: Option<String>,
    /// Number of splits to keep.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub n_candidates: Option<usize>,
    /// Subtoken budget per window.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Demonstrations per prompt.
    #[arg(long, global = true)]
    pub k_shot: Option<usize>,
    #[arg(long, global = true)]
    pub sample_docs: Option<usize>,
    #[arg(long, global = true)]
    pub max_in_flight: Option<usize>,
    /// Ontology JSON: {"Type": {"description": "...", "roles": [...]}}.
    #[arg(long, global = true)]
    pub ontology: Option<PathBuf>,
    /// System name shown in reports.
    #[arg(long, global = true)]
    pub system: Option<String>,
    /// Dataset name shown in reports.
    #[arg(long, global = true)]
    pub dataset: Option<String>,
}
