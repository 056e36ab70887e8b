//! Seeded sampling of demonstrations from the training split.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::model::{AnnotatedInstance, EventMention};

/// RNG for one event type: the same (seed, type) pair always yields the same stream.
pub(crate) fn type_rng(seed: u64, event_type: &str) -> ChaCha8Rng {
    let digest = Sha256::new().chain_update(seed.to_le_bytes()).chain_update(event_type.as_bytes()).finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

fn sample_from<'a, T>(pool: &[&'a T], n: usize, rng: &mut ChaCha8Rng) -> Vec<&'a T> {
    let n = n.min(pool.len());
    sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect()
}

#[derive(Debug, Clone)]
pub struct Demo<'a> {
    pub instance: &'a AnnotatedInstance,
    pub positive: bool,
}

#[derive(Debug, Clone, Default)]
pub struct DemoSelection<'a> {
    /// Positives and negatives interleaved, starting with a positive.
    pub demos: Vec<Demo<'a>>,
    pub requested_positives: usize,
    pub requested_negatives: usize,
    /// Fewer examples were available than requested on at least one side.
    pub short: bool,
    /// k > 0 but no positive example exists.
    pub degraded: bool,
}

impl DemoSelection<'_> {
    pub fn n_positive(&self) -> usize {
        self.demos.iter().filter(|d| d.positive).count()
    }

    pub fn n_negative(&self) -> usize {
        self.demos.len() - self.n_positive()
    }
}

/// Samples `ceil(k/2)` instances containing `event_type` and `floor(k/2)` without it.
pub fn select_demos<'a>(
    train: &'a [AnnotatedInstance],
    event_type: &str,
    k: usize,
    seed: u64,
) -> DemoSelection<'a> {
    let requested_positives = k.div_ceil(2);
    let requested_negatives = k / 2;
    let (positives, negatives): (Vec<&AnnotatedInstance>, Vec<&AnnotatedInstance>) =
        train.iter().partition(|inst| inst.events().iter().any(|e| e.event_type == event_type));

    let mut rng = type_rng(seed, event_type);
    let pos = sample_from(&positives, requested_positives, &mut rng);
    let neg = sample_from(&negatives, requested_negatives, &mut rng);

    let mut demos = Vec::with_capacity(pos.len() + neg.len());
    let mut pos_iter = pos.iter();
    let mut neg_iter = neg.iter();
    loop {
        let p = pos_iter.next();
        if let Some(&instance) = p {
            demos.push(Demo { instance, positive: true });
        }
        let n = neg_iter.next();
        if let Some(&instance) = n {
            demos.push(Demo { instance, positive: false });
        }
        if p.is_none() && n.is_none() {
            break;
        }
    }

    DemoSelection {
        short: pos.len() < requested_positives || neg.len() < requested_negatives,
        degraded: k > 0 && positives.is_empty(),
        demos,
        requested_positives,
        requested_negatives,
    }
}

/// Samples up to `k` events of `event_type` to serve as extraction demonstrations.
pub fn select_eae_demos<'a>(
    train: &'a [AnnotatedInstance],
    event_type: &str,
    k: usize,
    seed: u64,
) -> Vec<(&'a AnnotatedInstance, &'a EventMention)> {
    let pool: Vec<(&AnnotatedInstance, &EventMention)> = train
        .iter()
        .flat_map(|inst| inst.events().iter().filter(|e| e.event_type == event_type).map(move |e| (inst, e)))
        .collect();
    let refs: Vec<&(&AnnotatedInstance, &EventMention)> = pool.iter().collect();
    let mut rng = type_rng(seed, event_type);
    sample_from(&refs, k, &mut rng).into_iter().copied().collect()
}
