//! Core data model: scored samples, per-group descending sequences and
//! cross-group orderings (merged total orders that keep every group's
//! internal order).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// How equal scores contribute to pair statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Ties earn no credit.
    #[default]
    Strict,
    /// Ties earn half credit.
    Half,
}

/// One scored, labeled, group-tagged record.
///
/// `row` is the original input row index; it breaks score ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub row: usize,
    pub id: String,
    pub score: f64,
    pub label: Label,
    pub group: String,
}

impl Sample {
    pub fn new(row: usize, score: f64, label: Label, group: impl Into<String>) -> Self {
        Sample {
            row,
            id: row.to_string(),
            score,
            label,
            group: group.into(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.score.is_finite() {
            return Err(Error::input_at(self.row, format!("score {} is not finite", self.score)));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::input_at(
                self.row,
                format!("score {} outside [0, 1]", self.score),
            ));
        }
        Ok(())
    }
}

/// Descending-score order with ascending row index as tie-break.
pub(crate) fn rank_cmp(a: &Sample, b: &Sample) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then(a.row.cmp(&b.row))
}

/// One group's samples sorted by descending score.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSequence {
    group: String,
    items: Vec<Sample>,
    positives: usize,
}

impl GroupedSequence {
    /// Builds a sequence from samples of a single group, sorting them.
    pub fn new(group: impl Into<String>, mut items: Vec<Sample>) -> Result<Self> {
        let group = group.into();
        for s in &items {
            s.validate()?;
            if s.group != group {
                return Err(Error::input_at(
                    s.row,
                    format!("sample tagged {:?} in sequence for {:?}", s.group, group),
                ));
            }
        }
        items.sort_by(rank_cmp);
        let positives = items.iter().filter(|s| s.label.is_positive()).count();
        Ok(GroupedSequence {
            group,
            items,
            positives,
        })
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn items(&self) -> &[Sample] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.items.len() - self.positives
    }

    /// Keeps the items at the given 0-based positions (ascending).
    pub(crate) fn subsequence(&self, positions: &[usize]) -> GroupedSequence {
        let items: Vec<Sample> = positions.iter().map(|&p| self.items[p].clone()).collect();
        let positives = items.iter().filter(|s| s.label.is_positive()).count();
        GroupedSequence {
            group: self.group.clone(),
            items,
            positives,
        }
    }
}

/// Splits samples into per-group descending sequences.
///
/// Groups are returned in order of first appearance.
pub fn sort_into_groups(samples: &[Sample]) -> Result<Vec<GroupedSequence>> {
    if samples.is_empty() {
        return Err(Error::input("no samples"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut buckets: HashMap<&str, Vec<Sample>> = HashMap::new();
    for s in samples {
        s.validate()?;
        let bucket = buckets.entry(s.group.as_str()).or_insert_with(|| {
            order.push(s.group.clone());
            Vec::new()
        });
        bucket.push(s.clone());
    }
    order
        .into_iter()
        .map(|g| {
            let items = buckets.remove(g.as_str()).unwrap_or_default();
            GroupedSequence::new(g, items)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ScoreInduced,
    DpFit,
    Oracle,
    Merge,
}

/// An item reference: group index into [`CrossGroupOrdering::groups`] and
/// 0-based position within that group's sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderEntry {
    pub group: usize,
    pub position: usize,
}

/// A merged total order over several groups, top-ranked first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossGroupOrdering {
    groups: Vec<String>,
    entries: Vec<OrderEntry>,
    provenance: Provenance,
}

impl CrossGroupOrdering {
    pub fn new(groups: Vec<String>, entries: Vec<OrderEntry>, provenance: Provenance) -> Self {
        CrossGroupOrdering {
            groups,
            entries,
            provenance,
        }
    }

    /// Builds an ordering from `(group, position)` pairs.
    pub fn from_pairs<S: Into<String>>(
        groups: impl IntoIterator<Item = S>,
        pairs: &[(usize, usize)],
        provenance: Provenance,
    ) -> Self {
        CrossGroupOrdering::new(
            groups.into_iter().map(Into::into).collect(),
            pairs
                .iter()
                .map(|&(group, position)| OrderEntry { group, position })
                .collect(),
            provenance,
        )
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn entries(&self) -> &[OrderEntry] {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maps each entry to its sample, checking the ordering first.
    pub fn resolve<'a>(&self, groups: &'a [GroupedSequence]) -> Result<Vec<&'a Sample>> {
        let report = validate_ordering(self, groups);
        if let Some(v) = report.violation {
            return Err(Error::Invariant(format!("invalid ordering: {v}")));
        }
        let index = self.group_index(groups)?;
        Ok(self
            .entries
            .iter()
            .map(|e| &groups[index[e.group]].items[e.position])
            .collect())
    }

    /// For every ordering group, the index of the same-named sequence in `groups`.
    fn group_index(&self, groups: &[GroupedSequence]) -> Result<Vec<usize>> {
        self.groups
            .iter()
            .map(|name| {
                groups
                    .iter()
                    .position(|g| g.group == *name)
                    .ok_or_else(|| Error::input(format!("group {name:?} not among sequences")))
            })
            .collect()
    }
}

impl fmt::Display for CrossGroupOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let name = self.groups.get(e.group).map(String::as_str).unwrap_or("?");
            write!(f, "{}{}", name, e.position + 1)?;
        }
        write!(f, "]")
    }
}

/// The unadjusted ranking: every group merged by descending score.
pub fn ordering_from_scores(groups: &[GroupedSequence]) -> CrossGroupOrdering {
    let mut keyed: Vec<(&Sample, OrderEntry)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, seq)| {
            seq.items
                .iter()
                .enumerate()
                .map(move |(position, s)| (s, OrderEntry { group: g, position }))
        })
        .collect();
    keyed.sort_by(|(sa, ea), (sb, eb)| rank_cmp(sa, sb).then(ea.cmp(eb)));
    CrossGroupOrdering::new(
        groups.iter().map(|g| g.group.clone()).collect(),
        keyed.into_iter().map(|(_, e)| e).collect(),
        Provenance::ScoreInduced,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownGroup {
        entry: usize,
        group: String,
    },
    OutOfRange {
        entry: usize,
        group: String,
        position: usize,
    },
    Duplicate {
        entry: usize,
        group: String,
        position: usize,
    },
    Inversion {
        entry: usize,
        group: String,
        position: usize,
    },
    Missing {
        group: String,
        position: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownGroup { entry, group } => {
                write!(f, "unknown group {group:?} at entry {entry}")
            }
            Violation::OutOfRange { entry, group, position } => {
                write!(
                    f,
                    "position {} out of range for group {group:?} at entry {entry}",
                    position + 1
                )
            }
            Violation::Duplicate { entry, group, position } => {
                write!(f, "duplicate {group}{} at entry {entry}", position + 1)
            }
            Violation::Inversion { entry, group, position } => {
                write!(
                    f,
                    "group {group:?} inversion at entry {entry} ({group}{})",
                    position + 1
                )
            }
            Violation::Missing { group, position } => write!(f, "missing {group}{}", position + 1),
        }
    }
}

/// Outcome of [`validate_ordering`]; `violation` holds the first problem found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that `ordering` lists every item of `groups` exactly once with
/// each group's internal order preserved.
pub fn validate_ordering(ordering: &CrossGroupOrdering, groups: &[GroupedSequence]) -> ValidationReport {
    let fail = |v| ValidationReport { violation: Some(v) };
    let mut seen: Vec<Vec<bool>> = groups.iter().map(|g| vec![false; g.len()]).collect();
    let mut last: Vec<Option<usize>> = vec![None; groups.len()];
    let resolved: Vec<Option<usize>> = ordering
        .groups
        .iter()
        .map(|name| groups.iter().position(|g| g.group == *name))
        .collect();

    for (entry, e) in ordering.entries.iter().enumerate() {
        let Some(g) = resolved.get(e.group).copied().flatten() else {
            let group = ordering
                .groups
                .get(e.group)
                .cloned()
                .unwrap_or_else(|| format!("#{}", e.group));
            return fail(Violation::UnknownGroup { entry, group });
        };
        let group = || groups[g].group.clone();
        if e.position >= groups[g].len() {
            return fail(Violation::OutOfRange {
                entry,
                group: group(),
                position: e.position,
            });
        }
        if seen[g][e.position] {
            return fail(Violation::Duplicate {
                entry,
                group: group(),
                position: e.position,
            });
        }
        if last[g].is_some_and(|l| e.position < l) {
            return fail(Violation::Inversion {
                entry,
                group: group(),
                position: e.position,
            });
        }
        seen[g][e.position] = true;
        last[g] = Some(e.position);
    }
    for (g, flags) in seen.iter().enumerate() {
        if let Some(position) = flags.iter().position(|s| !s) {
            return fail(Violation::Missing {
                group: groups[g].group.clone(),
                position,
            });
        }
    }
    ValidationReport { violation: None }
}
