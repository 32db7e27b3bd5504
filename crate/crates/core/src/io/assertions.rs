//! Turning POAG definitions from a session into commonsense assertions.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::normalize_term;
use super::session::{PoagRecord, Session, SessionError};
use crate::kb::{KnowledgeBase, PrereqKind, Prerequisite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    HasPrerequisite,
    HasOutcome,
    FacilitatesGoal,
    UsedFor,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::HasPrerequisite => "HasPrerequisite",
            Relation::HasOutcome => "HasOutcome",
            Relation::FacilitatesGoal => "FacilitatesGoal",
            Relation::UsedFor => "UsedFor",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub session: String,
    pub seq: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub relation: Relation,
    pub arguments: Vec<String>,
    pub sentence: String,
    pub provenance: Provenance,
}

impl Assertion {
    /// `relation<TAB>arg1<TAB>arg2<TAB>sentence<TAB>session:seq`
    pub fn to_tsv_line(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        format!(
            "{}\t{}\t{}\t{}\t{}:{}",
            self.relation,
            clean(self.arguments.first().map(String::as_str).unwrap_or("")),
            clean(self.arguments.get(1).map(String::as_str).unwrap_or("")),
            clean(&self.sentence),
            clean(&self.provenance.session),
            self.provenance.seq
        )
    }
}

pub fn assertions_to_tsv(assertions: &[Assertion]) -> String {
    assertions
        .iter()
        .map(|a| a.to_tsv_line() + "\n")
        .collect()
}

/// Naive gerund: drop one trailing `e`, append `ing`.
pub fn gerund(verb: &str) -> String {
    let stem = verb.strip_suffix('e').unwrap_or(verb);
    format!("{stem}ing")
}

fn with_article(term: &str) -> String {
    let article = match term.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    };
    format!("{article} {term}")
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn tagged(name: &str, state: Option<&str>) -> String {
    let name = normalize_term(name);
    match state.map(normalize_term) {
        Some(s) if !s.is_empty() => format!("{s} {name}"),
        _ => name,
    }
}

fn prereq_term(p: &Prerequisite) -> String {
    tagged(&p.name, p.state.as_deref())
}

/// Assertions for one POAG definition.
pub fn poag_assertions(record: &PoagRecord, session: &str, seq: u32) -> Vec<Assertion> {
    let item = normalize_term(&record.item);
    let verb = normalize_term(&record.action);
    let doing = gerund(&verb);
    let provenance = || Provenance {
        session: session.to_string(),
        seq,
    };
    let make = |relation, a: String, b: String, sentence: String| Assertion {
        relation,
        arguments: vec![a, b],
        sentence,
        provenance: provenance(),
    };
    let mut out = Vec::new();

    let object_terms: Vec<String> = record
        .prerequisites
        .iter()
        .filter(|p| p.kind != PrereqKind::ActionDone)
        .map(prereq_term)
        .collect();
    for p in &record.prerequisites {
        let term = prereq_term(p);
        let sentence = match p.kind {
            PrereqKind::ActionDone => format!(
                "{doing} with {} requires {} first",
                with_article(&item),
                gerund(&term)
            ),
            _ => format!("{doing} with {} requires {}", with_article(&item), with_article(&term)),
        };
        out.push(make(Relation::HasPrerequisite, format!("{verb} {item}"), term, sentence));
    }

    let subject = if object_terms.is_empty() {
        format!("{verb} {item}")
    } else {
        format!("{verb} {item} with {}", object_terms.join(", "))
    };
    let listed: Vec<String> = object_terms.iter().map(|t| with_article(t)).collect();
    let goal = record.goal.as_deref().map(normalize_term);
    for o in &record.outcome {
        let outcome = tagged(&o.name, o.state.as_deref());
        let sentence = if listed.is_empty() {
            format!("the result of {doing} with {}, is {outcome}", with_article(&item))
        } else {
            format!(
                "the result of {doing} {} with {}, is {outcome}",
                join_list(&listed),
                with_article(&item)
            )
        };
        out.push(make(Relation::HasOutcome, subject.clone(), outcome.clone(), sentence));
        if let Some(g) = &goal {
            out.push(make(
                Relation::FacilitatesGoal,
                outcome.clone(),
                g.clone(),
                format!("{outcome} helps to {g}"),
            ));
        }
    }

    out.push(make(
        Relation::UsedFor,
        item.clone(),
        verb.clone(),
        format!("{} is used for {doing}", with_article(&item)),
    ));
    out
}

/// Assertions for every define-poag and define-combination action, in
/// sequence order.
pub fn extract_assertions(session: &Session, kb: &KnowledgeBase) -> Result<Vec<Assertion>, SessionError> {
    session.check(kb)?;
    Ok(session
        .actions
        .iter()
        .filter_map(|a| a.payload.poag().map(|p| poag_assertions(p, &session.id, a.seq)))
        .flatten()
        .collect())
}
