//! Scorer invariants checked against a brute-force tuple matcher.

use eebench::scorer::{micro_f1, score_instance, MetricCounts, MetricKind};
use eebench::{Argument, EventMention, Span};
use proptest::prelude::*;

const N_TOKENS: usize = 8;

fn span() -> impl Strategy<Value = Span> {
    (0..N_TOKENS, 1..3usize).prop_map(|(s, w)| Span::new(s, (s + w).min(N_TOKENS)).unwrap())
}

fn argument() -> impl Strategy<Value = Argument> {
    (span(), prop::sample::select(vec!["Agent", "Place"])).prop_map(|(s, r)| Argument::new(s, r))
}

fn event() -> impl Strategy<Value = EventMention> {
    (span(), prop::sample::select(vec!["A", "B", "C"]), prop::collection::vec(argument(), 0..=4))
        .prop_map(|(t, ty, args)| EventMention::new(t, ty, args))
}

fn events() -> impl Strategy<Value = Vec<EventMention>> {
    prop::collection::vec(event(), 0..=5)
}

/// Every tuple of `metric`, as plain strings, duplicates included.
fn tuples(events: &[EventMention], metric: MetricKind) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for ev in events {
        let trig = vec![ev.trigger.start().to_string(), ev.trigger.end().to_string()];
        match metric {
            MetricKind::TI => out.push(trig.clone()),
            MetricKind::TC => out.push([trig.clone(), vec![ev.event_type.clone()]].concat()),
            _ => {
                for a in &ev.arguments {
                    let mut t = vec![a.span.start().to_string(), a.span.end().to_string(), ev.event_type.clone()];
                    if matches!(metric, MetricKind::AIPlus | MetricKind::ACPlus) {
                        t.extend(trig.iter().cloned());
                    }
                    if matches!(metric, MetricKind::AC | MetricKind::ACPlus) {
                        t.push(a.role.clone());
                    }
                    out.push(t);
                }
            }
        }
    }
    out
}

fn distinct(items: Vec<Vec<String>>) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn oracle(gold: &[EventMention], pred: &[EventMention], metric: MetricKind) -> MetricCounts {
    let g = distinct(tuples(gold, metric));
    let p = distinct(tuples(pred, metric));
    let matched = p.iter().filter(|t| g.contains(t)).count();
    MetricCounts { matched, n_pred: p.len(), n_gold: g.len() }
}

fn matched(gold: &[EventMention], pred: &[EventMention], metric: MetricKind) -> Vec<Vec<String>> {
    let g = distinct(tuples(gold, metric));
    distinct(tuples(pred, metric)).into_iter().filter(|t| g.contains(t)).collect()
}

type Projection = fn(&Vec<String>) -> Vec<String>;

fn drop_at(t: &[String], idx: &[usize]) -> Vec<String> {
    t.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, v)| v.clone()).collect()
}

/// (finer metric, coarser metric, tuple projection from the finer to the coarser key).
const PROJECTIONS: [(MetricKind, MetricKind, Projection); 5] = [
    (MetricKind::TC, MetricKind::TI, |t| drop_at(t, &[2])),
    (MetricKind::AC, MetricKind::AI, |t| drop_at(t, &[3])),
    (MetricKind::AIPlus, MetricKind::AI, |t| drop_at(t, &[3, 4])),
    (MetricKind::ACPlus, MetricKind::AC, |t| drop_at(t, &[3, 4])),
    (MetricKind::ACPlus, MetricKind::AIPlus, |t| drop_at(t, &[5])),
];

/// Two distinct finer keys share one coarser key, so set semantics counts them differently.
fn collapses(events: &[EventMention], fine: MetricKind, coarse: MetricKind, project: Projection) -> bool {
    let fine_keys = distinct(tuples(events, fine));
    let projected = distinct(fine_keys.iter().map(project).collect());
    debug_assert_eq!(distinct(tuples(events, coarse)).len(), projected.len());
    projected.len() != fine_keys.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn counts_equal_brute_force(gold in events(), pred in events()) {
        for m in MetricKind::ALL {
            prop_assert_eq!(score_instance(&gold, &pred, m), oracle(&gold, &pred, m), "{}", m);
        }
    }

    #[test]
    fn matched_fine_keys_project_onto_matched_coarse_keys(gold in events(), pred in events()) {
        for (fine, coarse, project) in PROJECTIONS {
            let matched_coarse = matched(&gold, &pred, coarse);
            for t in matched(&gold, &pred, fine) {
                prop_assert!(matched_coarse.contains(&project(&t)), "{} -> {}", fine, coarse);
            }
        }
    }

    #[test]
    fn stricter_metrics_never_match_more_without_collapse(gold in events(), pred in events()) {
        for (fine, coarse, project) in PROJECTIONS {
            if collapses(&gold, fine, coarse, project) || collapses(&pred, fine, coarse, project) {
                continue;
            }
            prop_assert!(
                score_instance(&gold, &pred, fine).matched <= score_instance(&gold, &pred, coarse).matched,
                "{} vs {}", fine, coarse
            );
        }
    }

    #[test]
    fn swapping_sides_swaps_precision_and_recall(gold in events(), pred in events()) {
        for m in MetricKind::ALL {
            let ab = score_instance(&gold, &pred, m);
            let ba = score_instance(&pred, &gold, m);
            prop_assert_eq!(ab.matched, ba.matched);
            prop_assert_eq!((ab.n_pred, ab.n_gold), (ba.n_gold, ba.n_pred));
            let (pa, pb) = (micro_f1(ab), micro_f1(ba));
            prop_assert_eq!(pa.precision, pb.recall);
            prop_assert_eq!(pa.f1, pb.f1);
        }
    }

    #[test]
    fn order_of_events_is_irrelevant(gold in events(), pred in events(), seed in any::<u64>()) {
        let mut shuffled = pred.clone();
        let n = shuffled.len();
        if n > 1 {
            shuffled.rotate_left((seed as usize) % n);
            shuffled.swap(0, n - 1);
        }
        for m in MetricKind::ALL {
            prop_assert_eq!(score_instance(&gold, &pred, m), score_instance(&gold, &shuffled, m));
        }
    }

    #[test]
    fn self_match_is_perfect(gold in events()) {
        for m in MetricKind::ALL {
            let c = score_instance(&gold, &gold, m);
            let prf = micro_f1(c);
            if c.n_gold == 0 {
                prop_assert_eq!(prf.f1, 0.0);
            } else {
                prop_assert_eq!(prf.f1, 1.0);
            }
        }
    }

    #[test]
    fn f1_is_bounded(gold in events(), pred in events()) {
        for m in MetricKind::ALL {
            let prf = micro_f1(score_instance(&gold, &pred, m));
            prop_assert!((0.0..=1.0).contains(&prf.f1));
            prop_assert!(prf.f1 <= prf.precision.max(prf.recall) + 1e-12);
        }
    }
}
