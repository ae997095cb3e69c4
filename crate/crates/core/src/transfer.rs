//! Turning a fitted ordering into adjusted scores and a reusable score mapping.
//!
//! Training items of the reference group keep their scores. Every run of
//! other items between two reference anchors is spread evenly between the
//! anchor scores, with virtual anchors at 1.0 and 0.0 above and below. Each
//! adjusted group then gets a monotone piecewise-linear map from original to
//! adjusted score, which is what gets applied to unseen data.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DisparityMetric;
use crate::objective::Mode;
use crate::ranking::{CrossGroupOrdering, GroupedSequence, Sample};

pub const MAPPING_VERSION: u32 = 1;

/// Fit settings recorded alongside a mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingMeta {
    pub lambda: f64,
    pub metric: DisparityMetric,
    pub mode: Mode,
    /// Training sample count per group.
    pub counts: BTreeMap<String, usize>,
    pub objective: Option<f64>,
}

impl Default for MappingMeta {
    fn default() -> Self {
        MappingMeta {
            lambda: 0.0,
            metric: DisparityMetric::Xauc,
            mode: Mode::Absolute,
            counts: BTreeMap::new(),
            objective: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupKnots {
    /// `(original, adjusted)` pairs, ascending in original, boundaries included.
    pub knots: Vec<(f64, f64)>,
}

impl GroupKnots {
    /// Builds knots from training pairs: sorts, averages duplicate originals
    /// and adds the `(0, 0)` and `(1, 1)` boundaries unless data sits there.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<GroupKnots> {
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(pairs.len() + 2);
        let mut i = 0;
        while i < pairs.len() {
            let o = pairs[i].0;
            let mut j = i;
            let mut sum = 0.0;
            while j < pairs.len() && pairs[j].0 == o {
                sum += pairs[j].1;
                j += 1;
            }
            let mean = if j - i == 1 { pairs[i].1 } else { sum / (j - i) as f64 };
            knots.push((o, mean.clamp(0.0, 1.0)));
            i = j;
        }
        if knots.first().is_none_or(|k| k.0 > 0.0) {
            knots.insert(0, (0.0, 0.0));
        }
        if knots.last().is_none_or(|k| k.0 < 1.0) {
            knots.push((1.0, 1.0));
        }
        let out = GroupKnots { knots };
        out.validate("<new>")?;
        Ok(out)
    }

    fn validate(&self, group: &str) -> Result<()> {
        let k = &self.knots;
        if k.len() < 2 {
            return Err(Error::Mapping(format!(
                "group {group:?}: needs at least the two boundary knots, found {}",
                k.len()
            )));
        }
        for (i, &(o, a)) in k.iter().enumerate() {
            if !(0.0..=1.0).contains(&o) || !(0.0..=1.0).contains(&a) {
                return Err(Error::Mapping(format!(
                    "group {group:?}: knot {i} ({o}, {a}) outside [0, 1]"
                )));
            }
        }
        if k[0].0 != 0.0 || k[k.len() - 1].0 != 1.0 {
            return Err(Error::Mapping(format!(
                "group {group:?}: knots must span originals 0 to 1"
            )));
        }
        for (i, w) in k.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::Mapping(format!(
                    "group {group:?}: originals not strictly increasing at knot {}",
                    i + 1
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Mapping(format!(
                    "group {group:?}: adjusted values decrease at knot {} (not monotone)",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Proportional interpolation inside the segment holding `s`.
    pub fn apply(&self, s: f64) -> f64 {
        let k = &self.knots;
        let hi = k.partition_point(|&(o, _)| o < s).min(k.len() - 1);
        if k[hi].0 == s || hi == 0 {
            return k[hi].1;
        }
        let (o_lo, a_lo) = k[hi - 1];
        let (o_hi, a_hi) = k[hi];
        (a_lo + (s - o_lo) / (o_hi - o_lo) * (a_hi - a_lo)).clamp(0.0, 1.0)
    }

    /// Range of originals covered by training data (boundaries excluded).
    pub fn data_range(&self) -> Option<(f64, f64)> {
        let k = &self.knots;
        let lo = if k[0] == (0.0, 0.0) { 1 } else { 0 };
        let hi = if k[k.len() - 1] == (1.0, 1.0) {
            k.len() - 1
        } else {
            k.len()
        };
        (lo < hi).then(|| (k[lo].0, k[hi - 1].0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMapping {
    pub reference_group: String,
    pub groups: BTreeMap<String, GroupKnots>,
    pub meta: MappingMeta,
}

/// One training item after adjustment, in ranking order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedScore {
    pub row: usize,
    pub group: String,
    pub original: f64,
    pub adjusted: f64,
}

/// Adjusts training scores so they induce `ordering`, and derives the mapping.
pub fn adjust_training_scores(
    ordering: &CrossGroupOrdering,
    groups: &[GroupedSequence],
    reference_group: &str,
    meta: MappingMeta,
) -> Result<(Vec<AdjustedScore>, ScoreMapping)> {
    if !groups.iter().any(|g| g.group() == reference_group) {
        return Err(Error::input(format!("reference group {reference_group:?} not present")));
    }
    let ranked = ordering.resolve(groups)?;
    let mut adjusted: Vec<AdjustedScore> = ranked
        .iter()
        .map(|s| AdjustedScore {
            row: s.row,
            group: s.group.clone(),
            original: s.score,
            adjusted: s.score,
        })
        .collect();

    let mut upper = 1.0;
    let mut run_start = 0;
    for i in 0..=adjusted.len() {
        let anchor = adjusted
            .get(i)
            .filter(|a| a.group == reference_group)
            .map(|a| a.original);
        if i < adjusted.len() && anchor.is_none() {
            continue;
        }
        let lower = anchor.unwrap_or(0.0);
        let k = i - run_start;
        for (t, item) in adjusted[run_start..i].iter_mut().enumerate() {
            item.adjusted = upper - (t + 1) as f64 * (upper - lower) / (k + 1) as f64;
        }
        upper = lower;
        run_start = i + 1;
    }

    let mut pairs: BTreeMap<String, Vec<(f64, f64)>> = groups
        .iter()
        .filter(|g| g.group() != reference_group)
        .map(|g| (g.group().to_string(), Vec::new()))
        .collect();
    for a in adjusted.iter().filter(|a| a.group != reference_group) {
        pairs.entry(a.group.clone()).or_default().push((a.original, a.adjusted));
    }
    let groups = pairs
        .into_iter()
        .map(|(name, p)| GroupKnots::from_pairs(p).map(|k| (name, k)))
        .collect::<Result<_>>()?;
    let mapping = ScoreMapping {
        reference_group: reference_group.to_string(),
        groups,
        meta,
    };
    Ok((adjusted, mapping))
}

impl ScoreMapping {
    /// Maps one group's scores; the reference group passes through unchanged.
    pub fn apply(&self, group: &str, scores: &[f64]) -> Result<Vec<f64>> {
        if group == self.reference_group {
            return Ok(scores.to_vec());
        }
        let knots = self
            .groups
            .get(group)
            .ok_or_else(|| Error::input(format!("group {group:?} has no mapping")))?;
        scores
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::input_at(i, format!("score {s} outside [0, 1]")));
                }
                Ok(knots.apply(s))
            })
            .collect()
    }

    /// Copies `samples` with every score mapped through its group's knots.
    pub fn apply_samples(&self, samples: &[Sample]) -> Result<Vec<Sample>> {
        samples
            .iter()
            .map(|s| {
                s.validate()?;
                let mut out = s.clone();
                if s.group != self.reference_group {
                    let knots = self
                        .groups
                        .get(&s.group)
                        .ok_or_else(|| Error::input_at(s.row, format!("group {:?} has no mapping", s.group)))?;
                    out.score = knots.apply(s.score);
                }
                Ok(out)
            })
            .collect()
    }

    /// Fraction of `scores` inside the group's training knot range.
    pub fn coverage(&self, group: &str, scores: &[f64]) -> Option<f64> {
        if scores.is_empty() {
            return None;
        }
        let (lo, hi) = self.groups.get(group)?.data_range()?;
        let inside = scores.iter().filter(|&&s| (lo..=hi).contains(&s)).count();
        Some(inside as f64 / scores.len() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.contains_key(&self.reference_group) {
            return Err(Error::Mapping(format!(
                "reference group {:?} must not carry knots",
                self.reference_group
            )));
        }
        for (name, k) in &self.groups {
            k.validate(name)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = MappingFile {
            version: MAPPING_VERSION,
            reference_group: self.reference_group.clone(),
            metric: self.meta.metric,
            mode: self.meta.mode.clone(),
            lambda: self.meta.lambda,
            groups: self.groups.clone(),
            counts: self.meta.counts.clone(),
            objective: self.meta.objective,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Mapping(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ScoreMapping> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Mapping(e.to_string()))?;
        let found = raw
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Mapping("missing field `version`".into()))?;
        if found != MAPPING_VERSION as u64 {
            return Err(Error::Version {
                found: found.min(u32::MAX as u64) as u32,
                expected: MAPPING_VERSION,
            });
        }
        let file: MappingFile = serde_json::from_str(text).map_err(|e| Error::Mapping(e.to_string()))?;
        let mapping = ScoreMapping {
            reference_group: file.reference_group,
            groups: file.groups,
            meta: MappingMeta {
                lambda: file.lambda,
                metric: file.metric,
                mode: file.mode,
                counts: file.counts,
                objective: file.objective,
            },
        };
        mapping.validate()?;
        Ok(mapping)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    version: u32,
    reference_group: String,
    metric: DisparityMetric,
    mode: Mode,
    lambda: f64,
    groups: BTreeMap<String, GroupKnots>,
    counts: BTreeMap<String, usize>,
    objective: Option<f64>,
}

pub fn apply_mapping(mapping: &ScoreMapping, group: &str, scores: &[f64]) -> Result<Vec<f64>> {
    mapping.apply(group, scores)
}

pub fn save_mapping(mapping: &ScoreMapping, path: impl AsRef<Path>) -> Result<()> {
    mapping.validate()?;
    let text = mapping.to_json()?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_mapping(path: impl AsRef<Path>) -> Result<ScoreMapping> {
    let text = std::fs::read_to_string(path)?;
    ScoreMapping::from_json(&text)
}
