//! Exact pair-counting metrics: AUC, xAUC, PRF, URF, their disparities,
//! the xROC curve and the multi-group dominance report.
//!
//! Every metric is computed over a [`RankedList`], which is either the
//! score-induced ranking of raw samples (equal scores form tie blocks) or the
//! rank order of a [`CrossGroupOrdering`] (no ties; stored scores ignored).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Frac;
use crate::ranking::{rank_cmp, CrossGroupOrdering, GroupedSequence, Sample, TiePolicy};

/// Which disparity the objective penalises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisparityMetric {
    Xauc,
    Prf,
    Urf,
}

impl DisparityMetric {
    pub fn token(self) -> &'static str {
        match self {
            DisparityMetric::Xauc => "xauc",
            DisparityMetric::Prf => "prf",
            DisparityMetric::Urf => "urf",
        }
    }
}

impl fmt::Display for DisparityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for DisparityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xauc" => Ok(DisparityMetric::Xauc),
            "prf" => Ok(DisparityMetric::Prf),
            "urf" => Ok(DisparityMetric::Urf),
            other => Err(Error::input(format!(
                "unknown metric {other:?} (expected xauc, prf or urf)"
            ))),
        }
    }
}

/// An empirical fraction `numerator / denominator`.
///
/// Under [`TiePolicy::Half`] both counts are doubled so that a tie adds one
/// and a win adds two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricValue {
    pub numerator: u128,
    pub denominator: u128,
}

impl MetricValue {
    pub fn new(numerator: u128, denominator: u128) -> MetricValue {
        debug_assert!(denominator > 0);
        MetricValue { numerator, denominator }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn as_frac(&self) -> Frac {
        Frac::from_counts(self.numerator, self.denominator)
    }

    /// `|self − other|` as a reduced fraction.
    pub fn abs_diff(&self, other: &MetricValue) -> MetricValue {
        let d = self.as_frac().abs_diff(other.as_frac());
        MetricValue::new(d.num as u128, d.den as u128)
    }

    pub(crate) fn exact_cmp(&self, other: &MetricValue) -> std::cmp::Ordering {
        self.as_frac().exact_cmp(&other.as_frac())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedEntry {
    pub group: usize,
    pub positive: bool,
    /// Entries sharing a block are tied.
    pub block: usize,
}

/// Items in rank order (top first) with group and label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    groups: Vec<String>,
    entries: Vec<RankedEntry>,
}

impl RankedList {
    /// The score-induced ranking; equal scores share a tie block.
    pub fn from_samples(samples: &[Sample]) -> Result<RankedList> {
        let mut sorted: Vec<&Sample> = samples.iter().collect();
        for s in &sorted {
            s.validate()?;
        }
        sorted.sort_by(|a, b| rank_cmp(a, b));
        let mut groups: Vec<String> = Vec::new();
        for s in samples {
            if !groups.contains(&s.group) {
                groups.push(s.group.clone());
            }
        }
        let mut entries = Vec::with_capacity(sorted.len());
        let mut block = 0;
        let mut prev: Option<f64> = None;
        for s in sorted {
            if prev.is_some_and(|p| p != s.score) {
                block += 1;
            }
            prev = Some(s.score);
            entries.push(RankedEntry {
                group: groups.iter().position(|g| *g == s.group).unwrap_or_default(),
                positive: s.label.is_positive(),
                block,
            });
        }
        Ok(RankedList { groups, entries })
    }

    /// Raw-score ranking of the samples held in `groups`.
    pub fn from_sequences(groups: &[GroupedSequence]) -> Result<RankedList> {
        let samples: Vec<Sample> = groups.iter().flat_map(|g| g.items().iter().cloned()).collect();
        let mut list = RankedList::from_samples(&samples)?;
        // keep the sequences' group order rather than first appearance
        let names: Vec<String> = groups.iter().map(|g| g.group().to_string()).collect();
        let remap: Vec<usize> = list
            .groups
            .iter()
            .map(|g| names.iter().position(|n| n == g).unwrap_or_default())
            .collect();
        for e in &mut list.entries {
            e.group = remap[e.group];
        }
        list.groups = names;
        Ok(list)
    }

    /// The rank order of an ordering; every entry is its own block.
    pub fn from_ordering(ordering: &CrossGroupOrdering, groups: &[GroupedSequence]) -> Result<RankedList> {
        let samples = ordering.resolve(groups)?;
        Ok(RankedList {
            groups: ordering.groups().to_vec(),
            entries: ordering
                .entries()
                .iter()
                .zip(samples)
                .enumerate()
                .map(|(block, (e, s))| RankedEntry {
                    group: e.group,
                    positive: s.label.is_positive(),
                    block,
                })
                .collect(),
        })
    }

    /// Builds a list directly from `(group, positive)` pairs in rank order.
    pub fn from_ranked(groups: Vec<String>, items: impl IntoIterator<Item = (usize, bool)>) -> RankedList {
        RankedList {
            groups,
            entries: items
                .into_iter()
                .enumerate()
                .map(|(block, (group, positive))| RankedEntry { group, positive, block })
                .collect(),
        }
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn group_index(&self, name: &str) -> Result<usize> {
        self.groups
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::input(format!("unknown group {name:?}")))
    }

    fn group_name(&self, g: usize) -> &str {
        &self.groups[g]
    }
}

/// Counts (x, y) pairs with x ranked above y. `is_x` and `is_y` must be
/// disjoint. Returns `(wins, ties, nx, ny)`.
fn count_pairs(
    list: &RankedList,
    is_x: impl Fn(&RankedEntry) -> bool,
    is_y: impl Fn(&RankedEntry) -> bool,
) -> (u128, u128, u128, u128) {
    let (mut wins, mut ties) = (0u128, 0u128);
    let (mut nx, mut ny) = (0u128, 0u128);
    let mut x_above = 0u128;
    let entries = &list.entries;
    let mut start = 0;
    while start < entries.len() {
        let block = entries[start].block;
        let mut end = start;
        let (mut bx, mut by) = (0u128, 0u128);
        while end < entries.len() && entries[end].block == block {
            let e = &entries[end];
            if is_x(e) {
                bx += 1;
            } else if is_y(e) {
                by += 1;
            }
            end += 1;
        }
        wins += by * x_above;
        ties += bx * by;
        x_above += bx;
        nx += bx;
        ny += by;
        start = end;
    }
    (wins, ties, nx, ny)
}

fn pair_metric(
    list: &RankedList,
    ties: TiePolicy,
    what: impl FnOnce() -> String,
    is_x: impl Fn(&RankedEntry) -> bool,
    is_y: impl Fn(&RankedEntry) -> bool,
) -> Result<MetricValue> {
    let (wins, tied, nx, ny) = count_pairs(list, is_x, is_y);
    if nx == 0 || ny == 0 {
        return Err(Error::undefined(what()));
    }
    Ok(match ties {
        TiePolicy::Strict => MetricValue::new(wins, nx * ny),
        TiePolicy::Half => MetricValue::new(2 * wins + tied, 2 * nx * ny),
    })
}

/// Fraction of (positive, negative) pairs with the positive ranked above.
pub fn auc(list: &RankedList, ties: TiePolicy) -> Result<MetricValue> {
    pair_metric(
        list,
        ties,
        || "AUC needs at least one positive and one negative".into(),
        |e| e.positive,
        |e| !e.positive,
    )
}

/// Pr[positive from `from` ranked above negative from `to`].
pub fn xauc(list: &RankedList, from: &str, to: &str, ties: TiePolicy) -> Result<MetricValue> {
    let (f, t) = (list.group_index(from)?, list.group_index(to)?);
    xauc_idx(list, f, t, ties)
}

pub(crate) fn xauc_idx(list: &RankedList, f: usize, t: usize, ties: TiePolicy) -> Result<MetricValue> {
    pair_metric(
        list,
        ties,
        || {
            format!(
                "xAUC({}, {}) needs a positive in {0} and a negative in {1}",
                list.group_name(f),
                list.group_name(t)
            )
        },
        |e| e.group == f && e.positive,
        |e| e.group == t && !e.positive,
    )
}

pub fn delta_xauc(list: &RankedList, a: &str, b: &str, ties: TiePolicy) -> Result<MetricValue> {
    let ab = xauc(list, a, b, ties)?;
    let ba = xauc(list, b, a, ties)?;
    Ok(ab.abs_diff(&ba))
}

/// Pr[positive from `g` ranked above any negative].
pub fn prf(list: &RankedList, g: &str, ties: TiePolicy) -> Result<MetricValue> {
    prf_idx(list, list.group_index(g)?, ties)
}

pub(crate) fn prf_idx(list: &RankedList, g: usize, ties: TiePolicy) -> Result<MetricValue> {
    pair_metric(
        list,
        ties,
        || {
            format!(
                "PRF({}) needs a positive in the group and a negative overall",
                list.group_name(g)
            )
        },
        |e| e.group == g && e.positive,
        |e| !e.positive,
    )
}

pub fn delta_prf(list: &RankedList, a: &str, b: &str, ties: TiePolicy) -> Result<MetricValue> {
    Ok(prf(list, a, ties)?.abs_diff(&prf(list, b, ties)?))
}

/// Label-free rank-above probabilities between two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UrfPair {
    pub a_above_b: MetricValue,
    pub b_above_a: MetricValue,
    pub delta: MetricValue,
}

pub fn urf_pair(list: &RankedList, a: &str, b: &str, ties: TiePolicy) -> Result<UrfPair> {
    urf_pair_idx(list, list.group_index(a)?, list.group_index(b)?, ties)
}

pub(crate) fn above_idx(list: &RankedList, a: usize, b: usize, ties: TiePolicy) -> Result<MetricValue> {
    pair_metric(
        list,
        ties,
        || {
            format!(
                "URF needs non-empty groups {} and {}",
                list.group_name(a),
                list.group_name(b)
            )
        },
        |e| e.group == a,
        |e| e.group == b,
    )
}

pub(crate) fn urf_pair_idx(list: &RankedList, a: usize, b: usize, ties: TiePolicy) -> Result<UrfPair> {
    let a_above_b = above_idx(list, a, b, ties)?;
    let b_above_a = above_idx(list, b, a, ties)?;
    Ok(UrfPair {
        a_above_b,
        b_above_a,
        delta: a_above_b.abs_diff(&b_above_a),
    })
}

/// The two directed terms whose gap is the pair's disparity:
/// xAUC(a,b)/xAUC(b,a), PRF(a)/PRF(b) or Pr[a>b]/Pr[b>a].
pub(crate) fn directed_terms(
    list: &RankedList,
    metric: DisparityMetric,
    a: usize,
    b: usize,
    ties: TiePolicy,
) -> Result<(MetricValue, MetricValue)> {
    Ok(match metric {
        DisparityMetric::Xauc => (xauc_idx(list, a, b, ties)?, xauc_idx(list, b, a, ties)?),
        DisparityMetric::Prf => (prf_idx(list, a, ties)?, prf_idx(list, b, ties)?),
        DisparityMetric::Urf => (above_idx(list, a, b, ties)?, above_idx(list, b, a, ties)?),
    })
}

pub fn pair_disparity(
    list: &RankedList,
    metric: DisparityMetric,
    a: &str,
    b: &str,
    ties: TiePolicy,
) -> Result<MetricValue> {
    let (x, y) = directed_terms(list, metric, list.group_index(a)?, list.group_index(b)?, ties)?;
    Ok(x.abs_diff(&y))
}

/// The largest pairwise disparity and the pair attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupDisparity {
    pub value: MetricValue,
    pub pair: (String, String),
}

/// Max over all unordered group pairs of the pairwise disparity.
/// The first pair (in group order) wins ties.
pub fn multigroup_disparity(list: &RankedList, metric: DisparityMetric, ties: TiePolicy) -> Result<GroupDisparity> {
    let k = list.groups.len();
    if k < 2 {
        return Err(Error::undefined("disparity needs at least two groups"));
    }
    let mut best: Option<(MetricValue, usize, usize)> = None;
    for i in 0..k {
        for j in i + 1..k {
            let (x, y) = directed_terms(list, metric, i, j, ties)
                .map_err(|e| Error::undefined(format!("pair ({}, {}): {e}", list.groups[i], list.groups[j])))?;
            let d = x.abs_diff(&y);
            if best.as_ref().is_none_or(|(b, _, _)| d.exact_cmp(b).is_gt()) {
                best = Some((d, i, j));
            }
        }
    }
    let (value, i, j) = best.expect("at least one pair");
    Ok(GroupDisparity {
        value,
        pair: (list.groups[i].clone(), list.groups[j].clone()),
    })
}

/// Step curve of (Pr[S0^b ≥ θ], Pr[S1^a ≥ θ]) over the distinct scores θ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XrocCurve {
    pub points: Vec<(f64, f64)>,
}

impl XrocCurve {
    /// Trapezoid area; equals xAUC(a, b) with half credit for ties.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }
}

pub fn xroc_curve(list: &RankedList, a: &str, b: &str) -> Result<XrocCurve> {
    let (ga, gb) = (list.group_index(a)?, list.group_index(b)?);
    let is_pos = |e: &RankedEntry| e.group == ga && e.positive;
    let is_neg = |e: &RankedEntry| e.group == gb && !e.positive;
    let n1 = list.entries.iter().filter(|e| is_pos(e)).count();
    let n0 = list.entries.iter().filter(|e| is_neg(e)).count();
    if n1 == 0 || n0 == 0 {
        return Err(Error::undefined(format!(
            "xROC({a}, {b}) needs a positive in {a} and a negative in {b}"
        )));
    }
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let entries = &list.entries;
    let mut i = 0;
    while i < entries.len() {
        let block = entries[i].block;
        let mut touched = false;
        while i < entries.len() && entries[i].block == block {
            if is_pos(&entries[i]) {
                tp += 1;
                touched = true;
            } else if is_neg(&entries[i]) {
                fp += 1;
                touched = true;
            }
            i += 1;
        }
        if touched {
            points.push((fp as f64 / n0 as f64, tp as f64 / n1 as f64));
        }
    }
    Ok(XrocCurve { points })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "group", rename_all = "lowercase")]
pub enum DominanceVerdict {
    Dominant(String),
    Cycle,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceReport {
    pub groups: Vec<String>,
    /// `pairwise[i][j]` = Pr[S^i > S^j]; `None` on the diagonal.
    pub pairwise: Vec<Vec<Option<MetricValue>>>,
    pub verdict: DominanceVerdict,
}

/// Strict-majority dominance over all group pairs.
pub fn dominance_report(list: &RankedList, ties: TiePolicy) -> Result<DominanceReport> {
    let k = list.groups.len();
    if k < 2 {
        return Err(Error::undefined("dominance needs at least two groups"));
    }
    let mut pairwise = vec![vec![None; k]; k];
    for (i, row) in pairwise.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = Some(above_idx(list, i, j, ties)?);
            }
        }
    }
    let beats = |i: usize, j: usize| pairwise[i][j].is_some_and(|m: MetricValue| 2 * m.numerator > m.denominator);
    let verdict = if let Some(g) = (0..k).find(|&i| (0..k).all(|j| j == i || beats(i, j))) {
        DominanceVerdict::Dominant(list.groups[g].clone())
    } else if has_cycle(k, &beats) {
        DominanceVerdict::Cycle
    } else {
        DominanceVerdict::Tie
    };
    Ok(DominanceReport {
        groups: list.groups.clone(),
        pairwise,
        verdict,
    })
}

fn has_cycle(k: usize, edge: &impl Fn(usize, usize) -> bool) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit(v: usize, k: usize, edge: &impl Fn(usize, usize) -> bool, state: &mut [u8]) -> bool {
        state[v] = 1;
        for w in 0..k {
            if w != v && edge(v, w) && (state[w] == 1 || (state[w] == 0 && visit(w, k, edge, state))) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    let mut state = vec![0u8; k];
    (0..k).any(|v| state[v] == 0 && visit(v, k, edge, &mut state))
}
