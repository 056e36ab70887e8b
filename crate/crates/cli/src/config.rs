//! Settings from the JSON config file merged with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use eebench::llm::RetryPolicy;
use eebench::TaskKind;
use serde::{Deserialize, Serialize};

use crate::cli::Opts;
use crate::exit::{input_error, CliResult, ResultExt};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub respect_sentence_boundaries: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_shot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_docs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_prompt_units: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_in_flight: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry: Option<RetryPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub request_timeout_secs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ontology: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display())).input()?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display())).input()
    }

    /// Flags take precedence over values from the file.
    pub fn with_flags(mut self, opts: &Opts) -> Self {
        macro_rules! flag {
            ($($field:ident),*) => {
                $(if let Some(v) = &opts.$field { self.$field = Some(v.clone()); })*
            };
        }
        flag!(seed, task, dataset, system, ratios, k, n_candidates, budget, k_shot, sample_docs, endpoint, model, max_in_flight, ontology, cache_dir);
        self
    }

    pub fn resolve(opts: &Opts) -> CliResult<Self> {
        Ok(Self::load(opts.config.as_deref())?.with_flags(opts))
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| input_error("a seed is required (--seed or \"seed\" in the config)"))
    }
}

pub fn require<'a, T>(value: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| input_error(format!("--{flag} is required")))
}
