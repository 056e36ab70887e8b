//! Document-level train/dev/test splits chosen for balanced statistics.
//!
//! A pool of random partitions is drawn from a seeded RNG, every candidate is scored by a
//! [`BalanceObjective`], and the lowest-scoring candidates become the standard splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::compute_stats;
use crate::model::{AnnotatedInstance, DatasetProfile};

pub const DEFAULT_CANDIDATES: usize = 1000;
pub const DEFAULT_SPLITS: usize = 5;
const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("invalid ratios {train}/{dev}/{test}: each must be > 0 and they must sum to 1")]
    InvalidRatios { train: f64, dev: f64, test: f64 },
    #[error("cannot parse ratios {0:?}, expected e.g. 0.8/0.1/0.1")]
    BadRatioString(String),
    #[error("{n_docs} documents cannot fill train, dev and test")]
    TooFewDocuments { n_docs: usize },
    #[error("only {available} distinct candidate splits, {requested} requested")]
    TooFewCandidates { available: usize, requested: usize },
    #[error("candidate pool must be nonempty")]
    NoCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self, SplitError> {
        let ok = [train, dev, test].iter().all(|r| r.is_finite() && *r > 0.0)
            && ((train + dev + test) - 1.0).abs() <= 1e-9;
        if ok {
            Ok(Self { train, dev, test })
        } else {
            Err(SplitError::InvalidRatios { train, dev, test })
        }
    }

    /// Part sizes for `n_docs` documents: train and dev are rounded, test takes the rest.
    ///
    /// Dev and test get at least one document each; train gives them up if needed.
    pub fn sizes(&self, n_docs: usize) -> Result<(usize, usize, usize), SplitError> {
        if n_docs < 3 {
            return Err(SplitError::TooFewDocuments { n_docs });
        }
        let n = n_docs as f64;
        let mut train = ((self.train * n).round() as usize).clamp(1, n_docs - 2);
        let dev = ((self.dev * n).round() as usize).clamp(1, n_docs - 2);
        if train + dev >= n_docs {
            train = n_docs - dev - 1;
        }
        Ok((train, dev, n_docs - train - dev))
    }
}

impl FromStr for SplitRatios {
    type Err = SplitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(['/', ','])
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| SplitError::BadRatioString(s.to_string()))?;
        match parts.as_slice() {
            [a, b, c] => SplitRatios::new(*a, *b, *c),
            _ => Err(SplitError::BadRatioString(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartProfiles {
    pub train: DatasetProfile,
    pub dev: DatasetProfile,
    pub test: DatasetProfile,
}

/// One document partition with its per-part statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    /// Candidate index inside a pool; 1..=k once selected.
    pub split_id: usize,
    pub train: BTreeSet<String>,
    pub dev: BTreeSet<String>,
    pub test: BTreeSet<String>,
    pub discrepancy: f64,
    pub profiles: PartProfiles,
}

impl SplitAssignment {
    /// True when the parts are pairwise disjoint and their union is `docs`.
    pub fn is_partition_of(&self, docs: &BTreeSet<String>) -> bool {
        self.train.is_disjoint(&self.dev)
            && self.train.is_disjoint(&self.test)
            && self.dev.is_disjoint(&self.test)
            && self.train.len() + self.dev.len() + self.test.len() == docs.len()
            && self.train.iter().chain(&self.dev).chain(&self.test).all(|d| docs.contains(d))
    }
}

/// Densities and coverages compared between parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartStatistics {
    pub event_type_coverage: f64,
    pub role_type_coverage: f64,
    pub events_per_instance: f64,
    pub arguments_per_event: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PartStatistics {
    pub fn of(part: &DatasetProfile, all: &DatasetProfile) -> Self {
        Self {
            event_type_coverage: ratio(part.n_event_types, all.n_event_types),
            role_type_coverage: ratio(part.n_role_types, all.n_role_types),
            events_per_instance: ratio(part.n_events, part.n_instances),
            arguments_per_event: ratio(part.n_arguments, part.n_events),
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [
            self.event_type_coverage,
            self.role_type_coverage,
            self.events_per_instance,
            self.arguments_per_event,
        ]
    }
}

/// Scores how far dev and test drift from train; lower is better.
pub trait BalanceObjective: Sync {
    fn name(&self) -> &'static str;
    fn version(&self) -> u32;
    fn score(&self, parts: &PartProfiles, all: &DatasetProfile) -> f64;
}

/// Sum of relative deviations of the four part statistics from train.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeDeviation;

impl BalanceObjective for RelativeDeviation {
    fn name(&self) -> &'static str {
        "relative-deviation"
    }

    fn version(&self) -> u32 {
        1
    }

    fn score(&self, parts: &PartProfiles, all: &DatasetProfile) -> f64 {
        let train = PartStatistics::of(&parts.train, all).as_array();
        [&parts.dev, &parts.test]
            .into_iter()
            .map(|p| {
                let stats = PartStatistics::of(p, all).as_array();
                stats
                    .iter()
                    .zip(&train)
                    .map(|(s, t)| (s - t).abs() / t.max(EPSILON))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Instance indices grouped by document, with documents in sorted order.
struct DocIndex<'a> {
    dataset: &'a [AnnotatedInstance],
    docs: Vec<&'a str>,
    instances_of: BTreeMap<&'a str, Vec<usize>>,
}

impl<'a> DocIndex<'a> {
    fn new(dataset: &'a [AnnotatedInstance]) -> Self {
        let mut instances_of: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, inst) in dataset.iter().enumerate() {
            instances_of.entry(inst.doc_id()).or_default().push(i);
        }
        let docs = instances_of.keys().copied().collect();
        Self { dataset, docs, instances_of }
    }

    fn profile<'s, I: IntoIterator<Item = &'s str>>(&self, docs: I) -> DatasetProfile {
        compute_stats(
            docs.into_iter()
                .flat_map(|d| self.instances_of.get(d).into_iter().flatten())
                .map(|&i| &self.dataset[i]),
        )
    }

    fn part_profiles(&self, train: &BTreeSet<String>, dev: &BTreeSet<String>, test: &BTreeSet<String>) -> PartProfiles {
        PartProfiles {
            train: self.profile(train.iter().map(String::as_str)),
            dev: self.profile(dev.iter().map(String::as_str)),
            test: self.profile(test.iter().map(String::as_str)),
        }
    }
}

/// Score of `candidate` under the default objective, recomputed from `dataset`.
pub fn discrepancy(candidate: &SplitAssignment, dataset: &[AnnotatedInstance]) -> f64 {
    discrepancy_with(candidate, dataset, &RelativeDeviation)
}

pub fn discrepancy_with(
    candidate: &SplitAssignment,
    dataset: &[AnnotatedInstance],
    objective: &dyn BalanceObjective,
) -> f64 {
    let index = DocIndex::new(dataset);
    let parts = index.part_profiles(&candidate.train, &candidate.dev, &candidate.test);
    objective.score(&parts, &compute_stats(dataset))
}

/// Number of distinct partitions with the given part sizes, saturating.
pub fn distinct_partitions(n: usize, train: usize, dev: usize) -> u64 {
    fn binomial(n: usize, k: usize) -> u128 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = match acc.checked_mul((n - i) as u128) {
                Some(v) => v / (i as u128 + 1),
                None => return u128::MAX,
            };
        }
        acc
    }
    let total = binomial(n, train).saturating_mul(binomial(n - train, dev));
    u64::try_from(total).unwrap_or(u64::MAX)
}

pub fn propose_splits(
    dataset: &[AnnotatedInstance],
    ratios: SplitRatios,
    n_candidates: usize,
    seed: u64,
) -> Result<Vec<SplitAssignment>, SplitError> {
    propose_splits_with(dataset, ratios, n_candidates, seed, &RelativeDeviation)
}

/// Draws up to `n_candidates` distinct random partitions and scores each one.
///
/// When fewer distinct partitions exist than requested, every one of them is returned.
/// Candidates carry their pool index as `split_id`.
pub fn propose_splits_with(
    dataset: &[AnnotatedInstance],
    ratios: SplitRatios,
    n_candidates: usize,
    seed: u64,
    objective: &dyn BalanceObjective,
) -> Result<Vec<SplitAssignment>, SplitError> {
    if n_candidates == 0 {
        return Err(SplitError::NoCandidates);
    }
    let index = DocIndex::new(dataset);
    let n_docs = index.docs.len();
    let (n_train, n_dev, _) = ratios.sizes(n_docs)?;
    let possible = distinct_partitions(n_docs, n_train, n_dev);
    let target = (n_candidates as u64).min(possible) as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n_docs).collect();
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::with_capacity(target);
    let mut partitions: Vec<[BTreeSet<String>; 3]> = Vec::with_capacity(target);
    while partitions.len() < target {
        order.shuffle(&mut rng);
        let mut train = order[..n_train].to_vec();
        let mut dev = order[n_train..n_train + n_dev].to_vec();
        train.sort_unstable();
        dev.sort_unstable();
        if !seen.insert((train, dev)) {
            continue;
        }
        let names = |idx: &[usize]| idx.iter().map(|&i| index.docs[i].to_string()).collect::<BTreeSet<_>>();
        partitions.push([
            names(&order[..n_train]),
            names(&order[n_train..n_train + n_dev]),
            names(&order[n_train + n_dev..]),
        ]);
    }

    let all = compute_stats(dataset);
    Ok(partitions
        .into_par_iter()
        .enumerate()
        .map(|(i, [train, dev, test])| {
            let profiles = index.part_profiles(&train, &dev, &test);
            let discrepancy = objective.score(&profiles, &all);
            SplitAssignment { split_id: i, train, dev, test, discrepancy, profiles }
        })
        .collect())
}

/// Keeps the `k` lowest-discrepancy candidates, ties going to the earlier candidate,
/// and renumbers them `1..=k`.
pub fn select_splits(candidates: &[SplitAssignment], k: usize) -> Result<Vec<SplitAssignment>, SplitError> {
    if candidates.len() < k {
        return Err(SplitError::TooFewCandidates { available: candidates.len(), requested: k });
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].discrepancy.total_cmp(&candidates[b].discrepancy).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(rank, i)| SplitAssignment { split_id: rank + 1, ..candidates[i].clone() })
        .collect())
}

/// Summary of the candidate pool a selection was drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub n_candidates: usize,
    pub distinct_possible: u64,
    pub min_discrepancy: f64,
    pub median_discrepancy: f64,
    pub max_discrepancy: f64,
}

impl PoolSummary {
    pub fn of(candidates: &[SplitAssignment], distinct_possible: u64) -> Option<Self> {
        let mut scores: Vec<f64> = candidates.iter().map(|c| c.discrepancy).collect();
        if scores.is_empty() {
            return None;
        }
        scores.sort_by(f64::total_cmp);
        let n = scores.len();
        let median = if n % 2 == 1 { scores[n / 2] } else { (scores[n / 2 - 1] + scores[n / 2]) / 2.0 };
        Some(Self {
            n_candidates: n,
            distinct_possible,
            min_discrepancy: scores[0],
            median_discrepancy: median,
            max_discrepancy: scores[n - 1],
        })
    }
}

#[derive(Debug, Clone)]
pub struct SplitSet {
    pub splits: Vec<SplitAssignment>,
    pub pool: PoolSummary,
}

/// Proposes a pool, then selects the `k` most balanced splits from it.
pub fn generate_splits(
    dataset: &[AnnotatedInstance],
    ratios: SplitRatios,
    n_candidates: usize,
    k: usize,
    seed: u64,
    objective: &dyn BalanceObjective,
) -> Result<SplitSet, SplitError> {
    let pool = propose_splits_with(dataset, ratios, n_candidates, seed, objective)?;
    let splits = select_splits(&pool, k)?;
    let n_docs = DocIndex::new(dataset).docs.len();
    let (n_train, n_dev, _) = ratios.sizes(n_docs)?;
    let summary = PoolSummary::of(&pool, distinct_partitions(n_docs, n_train, n_dev)).ok_or(SplitError::NoCandidates)?;
    Ok(SplitSet { splits, pool: summary })
}
