//! Fitting more than two groups: an exact three-sided lattice, and an
//! iterative scheme that merges one group at a time into a frozen ordering.

use serde::{Deserialize, Serialize};

use crate::dp::{check_defined, side_items, CompletionRule, Engine, FitOptions, LatticeStats};
use crate::error::{Error, Result};
use crate::exact::Score;
use crate::metrics::{multigroup_disparity, GroupDisparity, MetricValue, RankedList};
use crate::objective::ObjectiveConfig;
use crate::oracle::exact_j;
use crate::ranking::{ordering_from_scores, CrossGroupOrdering, GroupedSequence, OrderEntry, Provenance, TiePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergePolicy {
    #[default]
    BySizeDesc,
    AsGiven,
    UserList,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub order: Vec<String>,
    pub policy: MergePolicy,
}

impl MergePlan {
    /// Largest groups first; equal sizes keep input order.
    pub fn by_size_desc(groups: &[GroupedSequence]) -> MergePlan {
        let mut idx: Vec<usize> = (0..groups.len()).collect();
        idx.sort_by_key(|&i| std::cmp::Reverse(groups[i].len()));
        MergePlan {
            order: idx.into_iter().map(|i| groups[i].group().to_string()).collect(),
            policy: MergePolicy::BySizeDesc,
        }
    }

    pub fn as_given(groups: &[GroupedSequence]) -> MergePlan {
        MergePlan {
            order: groups.iter().map(|g| g.group().to_string()).collect(),
            policy: MergePolicy::AsGiven,
        }
    }

    pub fn user_list(order: Vec<String>, groups: &[GroupedSequence]) -> Result<MergePlan> {
        let plan = MergePlan {
            order,
            policy: MergePolicy::UserList,
        };
        plan.resolve(groups)?;
        Ok(plan)
    }

    pub fn new(policy: MergePolicy, groups: &[GroupedSequence], order: Option<Vec<String>>) -> Result<MergePlan> {
        match (policy, order) {
            (MergePolicy::BySizeDesc, _) => Ok(MergePlan::by_size_desc(groups)),
            (MergePolicy::AsGiven, _) => Ok(MergePlan::as_given(groups)),
            (MergePolicy::UserList, Some(order)) => MergePlan::user_list(order, groups),
            (MergePolicy::UserList, None) => Err(Error::input("user-list merge plan needs an explicit order")),
        }
    }

    /// Input indices in plan order.
    fn resolve(&self, groups: &[GroupedSequence]) -> Result<Vec<usize>> {
        if self.order.len() != groups.len() {
            return Err(Error::input(format!(
                "merge plan lists {} groups, input has {}",
                self.order.len(),
                groups.len()
            )));
        }
        let mut seen = vec![false; groups.len()];
        self.order
            .iter()
            .map(|name| {
                let i = groups
                    .iter()
                    .position(|g| g.group() == name)
                    .ok_or_else(|| Error::input(format!("merge plan names unknown group {name:?}")))?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::input(format!("merge plan repeats group {name:?}")));
                }
                Ok(i)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct MultiFitResult {
    pub ordering: CrossGroupOrdering,
    /// `J = AUC − λ·D` of the final ordering.
    pub objective: Option<f64>,
    pub score: Option<Score>,
    pub utility_auc: Option<MetricValue>,
    /// Largest pairwise disparity of the final ordering, when every pair is
    /// defined.
    pub disparity: Option<GroupDisparity>,
    pub plan: Vec<String>,
    /// Set when the merged ordering scored below the score-induced one and
    /// the latter was returned instead.
    pub kept_scores: bool,
    /// Lattice objective at the end of each merge step.
    pub trace: Vec<f64>,
    pub stats: Vec<LatticeStats>,
}

fn finish(
    ordering: CrossGroupOrdering,
    groups: &[GroupedSequence],
    config: &ObjectiveConfig,
    plan: Vec<String>,
    trace: Vec<f64>,
    stats: Vec<LatticeStats>,
) -> Result<MultiFitResult> {
    let list = RankedList::from_ordering(&ordering, groups)?;
    // empty groups take no part in any metric
    let names: Vec<String> = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| g.group().to_string())
        .collect();
    let list = RankedList::from_ranked(
        names.clone(),
        list.entries().iter().map(|e| {
            let name = &list.groups()[e.group];
            (names.iter().position(|n| n == name).expect("listed"), e.positive)
        }),
    );
    let (utility_auc, score) = match exact_j(&list, config) {
        Ok((u, s)) => (Some(u), Some(s)),
        Err(Error::UndefinedMetric(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let disparity = multigroup_disparity(&list, config.metric, TiePolicy::Strict).ok();
    Ok(MultiFitResult {
        objective: score.map(|s| s.value(config.lambda)),
        score,
        utility_auc,
        disparity,
        ordering,
        plan,
        kept_scores: false,
        trace,
        stats,
    })
}

/// Runs the lattice over whole groups (one per side) given by input index.
fn fit_sides(
    groups: &[GroupedSequence],
    order: &[usize],
    config: &ObjectiveConfig,
    options: &FitOptions,
) -> Result<(CrossGroupOrdering, f64, LatticeStats)> {
    let names: Vec<String> = order.iter().map(|&i| groups[i].group().to_string()).collect();
    let counts: Vec<(u64, u64)> = order
        .iter()
        .map(|&i| (groups[i].positives() as u64, groups[i].negatives() as u64))
        .collect();
    let signed = check_defined(&names, &counts, config)?;
    let sides: Vec<Vec<(usize, bool)>> = order
        .iter()
        .enumerate()
        .map(|(g, &i)| side_items(&groups[i], g))
        .collect();
    let engine = Engine::new(
        &sides,
        order.len(),
        config.metric,
        signed,
        options.completion,
        config.exact_lambda(),
    );
    let out = engine.run(options.memory_budget)?;
    let ordering = CrossGroupOrdering::new(
        groups.iter().map(|g| g.group().to_string()).collect(),
        out.path
            .iter()
            .map(|&(side, position)| OrderEntry {
                group: order[side],
                position,
            })
            .collect(),
        Provenance::DpFit,
    );
    Ok((ordering, out.score.value(config.lambda), LatticeStats::from(&out)))
}

pub fn fit_exact_3d(
    pa: &GroupedSequence,
    pb: &GroupedSequence,
    pc: &GroupedSequence,
    config: &ObjectiveConfig,
) -> Result<MultiFitResult> {
    fit_exact_3d_with(pa, pb, pc, config, &FitOptions::default())
}

/// Exact lattice over three groups. With one group empty this is the
/// two-group fit of the others.
pub fn fit_exact_3d_with(
    pa: &GroupedSequence,
    pb: &GroupedSequence,
    pc: &GroupedSequence,
    config: &ObjectiveConfig,
    options: &FitOptions,
) -> Result<MultiFitResult> {
    config.validate()?;
    let groups = [pa.clone(), pb.clone(), pc.clone()];
    let order: Vec<usize> = (0..3).filter(|&i| !groups[i].is_empty()).collect();
    if order.len() < 2 {
        return Err(Error::undefined("need at least two non-empty groups"));
    }
    let (ordering, value, stats) = fit_sides(&groups, &order, config, options)?;
    let plan = order.iter().map(|&i| groups[i].group().to_string()).collect();
    finish(ordering, &groups, config, plan, vec![value], vec![stats])
}

pub fn fit_iterative(groups: &[GroupedSequence], config: &ObjectiveConfig, plan: &MergePlan) -> Result<MultiFitResult> {
    fit_iterative_with(groups, config, plan, &FitOptions::default())
}

/// Merges groups one at a time in plan order. Each step fits the lattice
/// between the ordering so far, kept frozen, and the next group; the
/// disparity covers every pair of groups merged so far. With three or more
/// groups and [`CompletionRule::Auto`], the merge runs once per completion
/// rule and the highest `J` wins; the score-induced ordering is returned if
/// it beats every merge.
pub fn fit_iterative_with(
    groups: &[GroupedSequence],
    config: &ObjectiveConfig,
    plan: &MergePlan,
    options: &FitOptions,
) -> Result<MultiFitResult> {
    config.validate()?;
    let order = plan.resolve(groups)?;
    if groups.len() < 2 {
        return Err(Error::input("need at least two groups"));
    }
    if let Some(g) = groups.iter().find(|g| g.is_empty()) {
        return Err(Error::undefined(format!("group {:?} is empty", g.group())));
    }
    let names: Vec<String> = order.iter().map(|&i| groups[i].group().to_string()).collect();
    let counts: Vec<(u64, u64)> = order
        .iter()
        .map(|&i| (groups[i].positives() as u64, groups[i].negatives() as u64))
        .collect();
    let signed = check_defined(&names, &counts, config)?;

    if groups.len() < 3 {
        let (ordering, trace, stats) = merge_in_order(groups, &order, config, signed, options)?;
        return finish(ordering, groups, config, names, trace, stats);
    }
    let rules = match options.completion {
        CompletionRule::Auto => vec![
            CompletionRule::FullDenominators,
            CompletionRule::PlacedDenominators,
            CompletionRule::ResolvedPairs,
            CompletionRule::OptimisticRanges,
        ],
        rule => vec![rule],
    };
    let lambda = config.exact_lambda();
    let mut best: Option<MultiFitResult> = None;
    for completion in rules {
        let o = FitOptions { completion, ..*options };
        let (ordering, trace, stats) = merge_in_order(groups, &order, config, signed, &o)?;
        let fitted = finish(ordering, groups, config, names.clone(), trace, stats)?;
        let better = match (&best, &fitted.score) {
            (None, _) => true,
            (Some(b), Some(f)) => b.score.as_ref().is_none_or(|bs| f.cmp_at(bs, &lambda).is_gt()),
            (Some(_), None) => false,
        };
        if better {
            best = Some(fitted);
        }
    }
    let fitted = best.expect("at least one completion rule");
    let raw = finish(
        ordering_from_scores(groups),
        groups,
        config,
        names,
        fitted.trace.clone(),
        fitted.stats.clone(),
    )?;
    match (fitted.score, raw.score) {
        (Some(f), Some(r)) if r.cmp_at(&f, &lambda).is_gt() => Ok(MultiFitResult {
            kept_scores: true,
            ..raw
        }),
        _ => Ok(fitted),
    }
}

/// One pass of pairwise merges; returns the ordering, the per-step lattice
/// objectives and stats.
fn merge_in_order(
    groups: &[GroupedSequence],
    order: &[usize],
    config: &ObjectiveConfig,
    signed: Option<(usize, usize)>,
    options: &FitOptions,
) -> Result<(CrossGroupOrdering, Vec<f64>, Vec<LatticeStats>)> {
    let (first, value, first_stats) = fit_sides(groups, &order[..2], config, options)?;
    let mut merged: Vec<OrderEntry> = first.entries().to_vec();
    let mut trace = vec![value];
    let mut stats = vec![first_stats];
    let plan_index = |input: usize| order.iter().position(|&i| i == input).expect("planned");

    for (step, &next) in order.iter().enumerate().skip(2) {
        let frozen: Vec<(usize, bool)> = merged
            .iter()
            .map(|e| {
                (
                    plan_index(e.group),
                    groups[e.group].items()[e.position].label.is_positive(),
                )
            })
            .collect();
        let incoming = side_items(&groups[next], step);
        let engine = Engine::new(
            &[frozen, incoming],
            step + 1,
            config.metric,
            signed,
            options.completion,
            config.exact_lambda(),
        );
        let out = engine.run(options.memory_budget)?;
        merged = out
            .path
            .iter()
            .map(|&(side, position)| match side {
                0 => merged[position],
                _ => OrderEntry { group: next, position },
            })
            .collect();
        trace.push(out.score.value(config.lambda));
        stats.push(LatticeStats::from(&out));
    }
    let ordering = CrossGroupOrdering::new(
        groups.iter().map(|g| g.group().to_string()).collect(),
        merged,
        Provenance::DpFit,
    );
    Ok((ordering, trace, stats))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Exact3d,
    Iterative(MergePlan),
}

/// Dispatches on group count: the two-group fit for two groups, otherwise
/// the given strategy.
pub fn fit_groups(
    groups: &[GroupedSequence],
    config: &ObjectiveConfig,
    strategy: &Strategy,
    options: &FitOptions,
) -> Result<MultiFitResult> {
    match (groups.len(), strategy) {
        (0 | 1, _) => Err(Error::input(format!("need at least two groups, got {}", groups.len()))),
        (3, Strategy::Exact3d) => fit_exact_3d_with(&groups[0], &groups[1], &groups[2], config, options),
        (_, Strategy::Exact3d) => Err(Error::input(format!(
            "the exact lattice handles three groups, got {}",
            groups.len()
        ))),
        (_, Strategy::Iterative(plan)) => fit_iterative_with(groups, config, plan, options),
    }
}
