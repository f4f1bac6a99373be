//! Cumulative attention and relevance per subject.
//!
//! The ledger is the only state carried between rankings of a stream. Subjects
//! are added lazily with zero totals and are never evicted, so a subject that
//! drops out of later rankings keeps contributing to unfairness.

use std::fmt;
use std::io;

use indexmap::IndexMap;

use crate::attention::PositionWeights;
use crate::error::{Error, Result};

/// Opaque subject identifier. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubjectId(String);

impl SubjectId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::EmptySubjectId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for SubjectId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LedgerEntry {
    pub cum_attention: f64,
    pub cum_relevance: f64,
}

impl LedgerEntry {
    /// `A - (R + r)`: negative values mark subjects owed attention.
    pub fn deficit(&self, current_relevance: f64) -> f64 {
        self.cum_attention - (self.cum_relevance + current_relevance)
    }
}

/// Per-subject running totals, kept in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Ledger {
    entries: IndexMap<SubjectId, LedgerEntry>,
    iterations: u64,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a ledger from stored totals, e.g. a snapshot. Later duplicates
    /// overwrite earlier ones.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (SubjectId, LedgerEntry)>,
    {
        Self {
            entries: entries.into_iter().collect(),
            iterations: 0,
        }
    }

    /// Adds every unknown id with zero totals. Known ids are left untouched.
    pub fn ensure_subjects<'a, I>(&mut self, ids: I)
    where
        I: IntoIterator<Item = &'a SubjectId>,
    {
        for id in ids {
            if !self.entries.contains_key(id) {
                self.entries.insert(id.clone(), LedgerEntry::default());
            }
        }
    }

    /// Credits the subject at display position `j` with `weights[j]` attention
    /// and its current relevance, then counts one more processed ranking.
    pub fn apply_ranking<F>(
        &mut self,
        display_order: &[SubjectId],
        weights: &PositionWeights,
        relevance_of: F,
    ) -> Result<()>
    where
        F: Fn(&SubjectId) -> Option<f64>,
    {
        if display_order.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "position weights",
                got: weights.len(),
                expected: display_order.len(),
            });
        }
        // Validate everything before mutating so a failed call leaves no trace.
        let mut updates = Vec::with_capacity(display_order.len());
        let mut seen = vec![false; self.entries.len()];
        for (pos, id) in display_order.iter().enumerate() {
            let idx = self
                .entries
                .get_index_of(id)
                .ok_or_else(|| Error::UnknownSubject(id.to_string()))?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::DuplicateSubject(id.to_string()));
            }
            let r = relevance_of(id).ok_or_else(|| Error::MissingRelevance(id.to_string()))?;
            updates.push((idx, weights[pos], r));
        }
        for (idx, w, r) in updates {
            let (_, entry) = self.entries.get_index_mut(idx).expect("index just resolved");
            entry.cum_attention += w;
            entry.cum_relevance += r;
        }
        self.iterations += 1;
        Ok(())
    }

    pub fn deficit(&self, id: &SubjectId, current_relevance: f64) -> Result<f64> {
        self.get(id)
            .map(|e| e.deficit(current_relevance))
            .ok_or_else(|| Error::UnknownSubject(id.to_string()))
    }

    pub fn get(&self, id: &SubjectId) -> Option<&LedgerEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &SubjectId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubjectId, &LedgerEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iterations_processed(&self) -> u64 {
        self.iterations
    }

    pub fn total_attention(&self) -> f64 {
        self.entries.values().map(|e| e.cum_attention).sum()
    }

    pub fn total_relevance(&self) -> f64 {
        self.entries.values().map(|e| e.cum_relevance).sum()
    }

    /// Writes `subject_id,cum_attention,cum_relevance` rows in first-seen order.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["subject_id", "cum_attention", "cum_relevance"])?;
        for (id, e) in &self.entries {
            w.write_record([
                id.as_str(),
                &e.cum_attention.to_string(),
                &e.cum_relevance.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
