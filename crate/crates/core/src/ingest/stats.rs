use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{AnnotatedInstance, DatasetProfile};

/// Token-length caps commonly imposed by filtering preprocessors.
pub const LENGTH_CAPS: [usize; 3] = [128, 256, 512];

/// Counts documents, instances, event/role types, events and arguments.
pub fn compute_stats<'a, I>(dataset: I) -> DatasetProfile
where
    I: IntoIterator<Item = &'a AnnotatedInstance>,
{
    let mut docs = BTreeSet::new();
    let mut profile = DatasetProfile::default();
    for inst in dataset {
        docs.insert(inst.doc_id());
        profile.n_instances += 1;
        for ev in inst.events() {
            profile.n_events += 1;
            profile.event_type_set.insert(ev.event_type.clone());
            for arg in &ev.arguments {
                profile.n_arguments += 1;
                profile.role_type_set.insert(arg.role.clone());
            }
        }
    }
    profile.n_docs = docs.len();
    profile.n_event_types = profile.event_type_set.len();
    profile.n_role_types = profile.role_type_set.len();
    profile
}

/// Phenomena that stricter preprocessors filter out; the harness keeps and counts them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub n_instances: usize,
    pub n_events: usize,
    pub multi_token_triggers: usize,
    /// Unordered pairs of arguments of the same event whose spans overlap.
    pub overlapping_argument_pairs: usize,
    /// Arguments whose span overlaps their own trigger.
    pub arguments_overlapping_trigger: usize,
    pub events_without_arguments: usize,
    /// Number of instances longer than each cap, in tokens.
    pub instances_over_length: BTreeMap<usize, usize>,
    pub retained_instances: usize,
}

pub fn validate_assumptions(dataset: &[AnnotatedInstance]) -> ComplianceReport {
    let mut report = ComplianceReport {
        instances_over_length: LENGTH_CAPS.iter().map(|&c| (c, 0)).collect(),
        ..Default::default()
    };
    for inst in dataset {
        report.n_instances += 1;
        for (&cap, count) in report.instances_over_length.iter_mut() {
            if inst.instance().len() > cap {
                *count += 1;
            }
        }
        for ev in inst.events() {
            report.n_events += 1;
            if ev.trigger.width() > 1 {
                report.multi_token_triggers += 1;
            }
            if ev.arguments.is_empty() {
                report.events_without_arguments += 1;
            }
            for (i, a) in ev.arguments.iter().enumerate() {
                if a.span.overlaps(&ev.trigger) {
                    report.arguments_overlapping_trigger += 1;
                }
                report.overlapping_argument_pairs +=
                    ev.arguments[i + 1..].iter().filter(|b| a.span.overlaps(&b.span)).count();
            }
        }
    }
    report.retained_instances = report.n_instances;
    report
}
