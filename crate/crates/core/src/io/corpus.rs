//! Seed corpus of action-object pairs scored by a hit-count provider.
//!
//! Live search hit counts cannot be reproduced, so scoring goes through
//! [`CountProvider`]. [`TsvCounts`] reads `verb<TAB>noun<TAB>count` files
//! and reports 0 for pairs it does not list. A networked provider only has to
//! implement the trait.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::normalize_term;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub verb: String,
    pub noun: String,
    /// Joint-likelihood proxy, in hits.
    pub score: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("{0} list is empty after normalization")]
    EmptyList(&'static str),
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
}

pub trait CountProvider {
    /// Non-negative hit count for the pair.
    fn count(&self, verb: &str, noun: &str) -> Result<f64, String>;
}

impl<F> CountProvider for F
where
    F: Fn(&str, &str) -> Result<f64, String>,
{
    fn count(&self, verb: &str, noun: &str) -> Result<f64, String> {
        self(verb, noun)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TsvCounts {
    counts: BTreeMap<(String, String), f64>,
}

impl TsvCounts {
    /// Parses `verb<TAB>noun<TAB>count` lines. Blank lines and `#` comments
    /// are skipped; terms are normalized.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut counts = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |message: String| CorpusError::BadLine { line, message };
            let fields: Vec<&str> = raw.split('\t').collect();
            let [verb, noun, count] = fields.as_slice() else {
                return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            let score: f64 = count
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad count `{count}`")))?;
            if !score.is_finite() || score < 0.0 {
                return Err(bad(format!("count must be a non-negative number, got {count}")));
            }
            let (verb, noun) = (normalize_term(verb), normalize_term(noun));
            if verb.is_empty() || noun.is_empty() {
                return Err(bad("empty term".into()));
            }
            counts.insert((verb, noun), score);
        }
        Ok(TsvCounts { counts })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl CountProvider for TsvCounts {
    fn count(&self, verb: &str, noun: &str) -> Result<f64, String> {
        Ok(self
            .counts
            .get(&(verb.to_string(), noun.to_string()))
            .copied()
            .unwrap_or(0.0))
    }
}

/// Reads a one-term-per-line word list, normalizing each entry. Blank lines
/// are skipped and duplicates dropped; a non-blank line that normalizes to
/// nothing is an error.
pub fn load_word_list(text: &str) -> Result<Vec<String>, CorpusError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let term = normalize_term(raw);
        if term.is_empty() {
            return Err(CorpusError::BadLine {
                line: i + 1,
                message: format!("`{raw}` normalizes to an empty term"),
            });
        }
        if seen.insert(term.clone()) {
            out.push(term);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
    /// Pairs the provider could not score, with its message.
    pub failures: Vec<(String, String, String)>,
}

impl CorpusReport {
    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.verb, e.noun, e.score))
            .collect()
    }
}

pub fn corpus_order(a: &CorpusEntry, b: &CorpusEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.verb.cmp(&b.verb))
        .then_with(|| a.noun.cmp(&b.noun))
}

fn normalized_set(items: &[String], what: &'static str) -> Result<Vec<String>, CorpusError> {
    let set: BTreeSet<String> = items
        .iter()
        .map(|s| normalize_term(s))
        .filter(|s| !s.is_empty())
        .collect();
    if set.is_empty() {
        return Err(CorpusError::EmptyList(what));
    }
    Ok(set.into_iter().collect())
}

/// Scores every (verb, noun) pair, drops zero scores and sorts by score
/// descending, then verb, then noun.
pub fn bootstrap_corpus(
    nouns: &[String],
    verbs: &[String],
    counts: &dyn CountProvider,
) -> Result<CorpusReport, CorpusError> {
    let nouns = normalized_set(nouns, "noun")?;
    let verbs = normalized_set(verbs, "verb")?;
    let mut report = CorpusReport::default();
    for verb in &verbs {
        for noun in &nouns {
            match counts.count(verb, noun) {
                Ok(score) if score.is_finite() && score >= 0.0 => {
                    if score > 0.0 {
                        report.entries.push(CorpusEntry {
                            verb: verb.clone(),
                            noun: noun.clone(),
                            score,
                        });
                    }
                }
                Ok(score) => report.failures.push((
                    verb.clone(),
                    noun.clone(),
                    format!("invalid score {score}"),
                )),
                Err(e) => report.failures.push((verb.clone(), noun.clone(), e)),
            }
        }
    }
    report.entries.sort_by(corpus_order);
    Ok(report)
}
