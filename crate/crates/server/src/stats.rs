//! Frequency of identical POAG definitions across sessions.

use std::collections::BTreeMap;

use gecka_core::io::session::{PoagRecord, Session};
use gecka_core::{normalize_term, PrereqKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoagStat {
    pub item: String,
    pub action: String,
    /// Rendered as `state name`; action-done prerequisites as `after verb`.
    pub prerequisites: Vec<String>,
    pub outcome: Vec<String>,
    pub goal: Option<String>,
    pub frequency: u64,
}

fn term(name: &str, state: Option<&str>) -> String {
    let name = normalize_term(name);
    match state.map(normalize_term) {
        Some(s) if !s.is_empty() => format!("{s} {name}"),
        _ => name,
    }
}

fn rendered(p: &PoagRecord) -> (Vec<String>, Vec<String>) {
    let prereqs = p
        .prerequisites
        .iter()
        .map(|q| match q.kind {
            PrereqKind::ActionDone => format!("after {}", normalize_term(&q.name)),
            _ => term(&q.name, q.state.as_deref()),
        })
        .collect();
    let outcome = p.outcome.iter().map(|o| term(&o.name, o.state.as_deref())).collect();
    (prereqs, outcome)
}

type Key = (String, String, Vec<String>, Vec<String>, Option<String>);

/// Groups every define-poag and define-combination action by its
/// normalized fields (prerequisite and outcome order ignored) and sorts by
/// frequency, then item. Each group keeps the field order of its first
/// occurrence.
pub fn poag_stats<'a>(sessions: impl IntoIterator<Item = &'a Session>, limit: usize) -> Vec<PoagStat> {
    let mut groups: BTreeMap<Key, PoagStat> = BTreeMap::new();
    for s in sessions {
        for p in s.actions.iter().filter_map(|a| a.payload.poag()) {
            let (prerequisites, outcome) = rendered(p);
            let (mut sp, mut so) = (prerequisites.clone(), outcome.clone());
            sp.sort();
            so.sort();
            let item = normalize_term(&p.item);
            let action = normalize_term(&p.action);
            let goal = p.goal.as_deref().map(normalize_term);
            groups
                .entry((item.clone(), action.clone(), sp, so, goal.clone()))
                .or_insert(PoagStat {
                    item,
                    action,
                    prerequisites,
                    outcome,
                    goal,
                    frequency: 0,
                })
                .frequency += 1;
        }
    }
    let mut out: Vec<(Key, PoagStat)> = groups.into_iter().collect();
    out.sort_by(|(ka, a), (kb, b)| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.item.cmp(&b.item))
            .then_with(|| ka.cmp(kb))
    });
    out.into_iter().map(|(_, s)| s).take(limit).collect()
}
