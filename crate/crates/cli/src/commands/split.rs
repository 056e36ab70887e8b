use std::collections::BTreeSet;

use eebench::splitter::{generate_splits, BalanceObjective, RelativeDeviation, SplitError, SplitRatios, DEFAULT_CANDIDATES, DEFAULT_SPLITS};
use serde::Serialize;

use super::{load_corpus, out_dir};
use crate::cli::Opts;
use crate::config::{require, Settings};
use crate::exit::{CliResult, ExitKind, ResultExt};
use crate::manifest::{write_json, ObjectiveInfo, RunManifest};

const DEFAULT_RATIOS: &str = "0.8/0.1/0.1";

#[derive(Serialize)]
struct SplitConfig {
    ratios: SplitRatios,
    k: usize,
    n_candidates: usize,
    seed: u64,
}

pub fn run(opts: &Opts) -> CliResult {
    let settings = Settings::resolve(opts)?;
    let corpus = require(&opts.corpus, "corpus")?;
    let seed = settings.require_seed()?;
    let ratios: SplitRatios = settings.ratios.as_deref().unwrap_or(DEFAULT_RATIOS).parse().input()?;
    let cfg = SplitConfig {
        ratios,
        k: settings.k.unwrap_or(DEFAULT_SPLITS),
        n_candidates: settings.n_candidates.unwrap_or(DEFAULT_CANDIDATES),
        seed,
    };
    let data = load_corpus(corpus)?;
    let dir = out_dir(&opts.out_dir)?;

    let objective = RelativeDeviation;
    let set = generate_splits(&data, cfg.ratios, cfg.n_candidates, cfg.k, seed, &objective).map_err(|e| {
        let kind = match e {
            SplitError::InvalidRatios { .. } | SplitError::BadRatioString(_) => ExitKind::Input,
            _ => ExitKind::Infeasible,
        };
        crate::exit::CliError { kind, error: e.into() }
    })?;

    let docs: BTreeSet<String> = data.iter().map(|d| d.doc_id().to_string()).collect();
    for split in &set.splits {
        debug_assert!(split.is_partition_of(&docs));
        write_json(&dir.join(format!("split_{}.json", split.split_id)), split).input()?;
    }
    write_json(&dir.join("pool.json"), &set.pool).input()?;
    let mut manifest = RunManifest::new("split", &cfg).input()?.seed("seed", seed).input(corpus).input()?;
    manifest.objective = Some(ObjectiveInfo { name: objective.name().into(), version: objective.version() });
    manifest.write(dir).input()?;
    for s in &set.splits {
        eprintln!(
            "split {}: {}/{}/{} docs, discrepancy {:.4} (pool median {:.4})",
            s.split_id,
            s.train.len(),
            s.dev.len(),
            s.test.len(),
            s.discrepancy,
            set.pool.median_discrepancy
        );
    }
    Ok(())
}
