pub mod corpus;
pub mod llm;
pub mod report;
pub mod score;
pub mod split;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use eebench::ingest::parse_dataset;
use eebench::splitter::SplitAssignment;
use eebench::AnnotatedInstance;

use crate::config::require;
use crate::exit::{input_error, CliResult, ResultExt};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).with_context(|| format!("opening {}", path.display())).input().map(BufReader::new)
}

pub fn load_corpus(path: &Path) -> CliResult<Vec<AnnotatedInstance>> {
    parse_dataset(open(path)?).with_context(|| format!("in {}", path.display())).input()
}

pub fn out_dir(dir: &Option<PathBuf>) -> CliResult<&Path> {
    let dir = require(dir, "out-dir")?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).input()?;
    Ok(dir)
}

fn read_split(path: &Path) -> CliResult<SplitAssignment> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
    serde_json::from_str(&text).with_context(|| format!("parsing split file {}", path.display())).input()
}

/// A single split file, or every `split_*.json` in a directory ordered by split id.
pub fn load_splits(path: &Path) -> CliResult<Vec<SplitAssignment>> {
    if !path.is_dir() {
        return Ok(vec![read_split(path)?]);
    }
    let mut splits = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("listing {}", path.display())).input()? {
        let p = entry.input()?.path();
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("split_") && name.ends_with(".json") {
            splits.push(read_split(&p)?);
        }
    }
    if splits.is_empty() {
        return Err(input_error(format!("no split_*.json files in {}", path.display())));
    }
    splits.sort_by_key(|s| s.split_id);
    Ok(splits)
}
