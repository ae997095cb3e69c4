//! Equidistant subsampling, so large groups can be fitted on a small lattice
//! and the result transferred back to every sample.

use std::collections::BTreeMap;

use crate::dp::{fit_two_group_with, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::metrics::{auc, RankedList};
use crate::objective::{disparity_term, ObjectiveConfig};
use crate::ranking::{GroupedSequence, Sample, TiePolicy};
use crate::transfer::{adjust_training_scores, MappingMeta, ScoreMapping};

/// Selected 1-based positions for each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsamplePlan {
    pub target_per_group: usize,
    pub indices: Vec<Vec<usize>>,
}

/// Positions `1, 1+s, 1+2s, …` with `s = ⌊n/m⌋`, at most `m` of them.
pub fn equidistant_indices(n: usize, m: usize) -> Result<Vec<usize>> {
    if m < 2 {
        return Err(Error::input(format!("subsample size must be at least 2, got {m}")));
    }
    if m >= n {
        return Ok((1..=n).collect());
    }
    let stride = n / m;
    Ok((0..m).map(|t| 1 + t * stride).collect())
}

pub fn equidistant_subsample(seq: &GroupedSequence, m: usize) -> Result<GroupedSequence> {
    let idx = equidistant_indices(seq.len(), m)?;
    let positions: Vec<usize> = idx.iter().map(|i| i - 1).collect();
    Ok(seq.subsequence(&positions))
}

impl SubsamplePlan {
    pub fn new(groups: &[GroupedSequence], m: usize) -> Result<SubsamplePlan> {
        let indices = groups
            .iter()
            .map(|g| equidistant_indices(g.len(), m))
            .collect::<Result<_>>()?;
        Ok(SubsamplePlan {
            target_per_group: m,
            indices,
        })
    }

    pub fn apply(&self, groups: &[GroupedSequence]) -> Vec<GroupedSequence> {
        groups
            .iter()
            .zip(&self.indices)
            .map(|(g, idx)| g.subsequence(&idx.iter().map(|i| i - 1).collect::<Vec<_>>()))
            .collect()
    }
}

/// Full-data AUC and disparity before and after the mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferReport {
    pub auc_before: f64,
    pub auc_after: f64,
    pub disparity_before: f64,
    pub disparity_after: f64,
}

impl TransferReport {
    pub fn measure(before: &[Sample], after: &[Sample], config: &ObjectiveConfig) -> Result<TransferReport> {
        let b = RankedList::from_samples(before)?;
        let a = RankedList::from_samples(after)?;
        Ok(TransferReport {
            auc_before: auc(&b, TiePolicy::Strict)?.value(),
            auc_after: auc(&a, TiePolicy::Strict)?.value(),
            disparity_before: disparity_term(&b, config)?.to_f64(),
            disparity_after: disparity_term(&a, config)?.to_f64(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SubsampledFit {
    pub plan: SubsamplePlan,
    pub fit: FitResult,
    pub mapping: ScoreMapping,
    /// Every input sample with its mapped score, in input group order.
    pub adjusted: Vec<Sample>,
    pub report: TransferReport,
}

/// Fits two groups on equidistant subsamples of size `m` and maps all
/// samples with the resulting knots. Group `a` is the reference.
pub fn subsampled_fit(
    a: &GroupedSequence,
    b: &GroupedSequence,
    config: &ObjectiveConfig,
    m: usize,
    options: &FitOptions,
) -> Result<SubsampledFit> {
    let full = [a.clone(), b.clone()];
    let plan = SubsamplePlan::new(&full, m)?;
    let sub = plan.apply(&full);
    let fit = fit_two_group_with(&sub[0], &sub[1], config, options)?;
    let meta = MappingMeta {
        lambda: config.lambda,
        metric: config.metric,
        mode: config.mode.clone(),
        counts: sub
            .iter()
            .map(|g| (g.group().to_string(), g.len()))
            .collect::<BTreeMap<_, _>>(),
        objective: Some(fit.objective),
    };
    let (_, mapping) = adjust_training_scores(&fit.ordering, &sub, a.group(), meta)?;
    let samples: Vec<Sample> = full.iter().flat_map(|g| g.items().iter().cloned()).collect();
    let adjusted = mapping.apply_samples(&samples)?;
    let report = TransferReport::measure(&samples, &adjusted, config)?;
    Ok(SubsampledFit {
        plan,
        fit,
        mapping,
        adjusted,
        report,
    })
}
