//! Exhaustive search over interleavings, for checking the DP on small inputs.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exact::{Frac, Score};
use crate::metrics::{auc, pair_disparity, DisparityMetric, MetricValue, RankedList};
use crate::objective::{disparity_term, ObjectiveConfig};
use crate::ranking::{CrossGroupOrdering, GroupedSequence, OrderEntry, Provenance, TiePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_orderings: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_orderings: 1_000_000,
        }
    }
}

/// Number of interleavings of sequences with the given lengths, if it fits.
pub fn multinomial(lengths: &[usize]) -> Option<u128> {
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for &n in lengths {
        // running product of C(placed + i, i)
        for i in 1..=n as u128 {
            placed += 1;
            total = total.checked_mul(placed)? / i;
        }
    }
    Some(total)
}

/// Iterator over all interleavings, lexicographic in the sequence of group
/// choices.
#[derive(Debug, Clone)]
pub struct Interleavings {
    groups: Vec<String>,
    choice: Vec<usize>,
    started: bool,
    done: bool,
}

impl Interleavings {
    fn ordering(&self) -> CrossGroupOrdering {
        let mut next = vec![0usize; self.groups.len()];
        let entries = self
            .choice
            .iter()
            .map(|&g| {
                next[g] += 1;
                OrderEntry {
                    group: g,
                    position: next[g] - 1,
                }
            })
            .collect();
        CrossGroupOrdering::new(self.groups.clone(), entries, Provenance::Oracle)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl Iterator for Interleavings {
    type Item = CrossGroupOrdering;

    fn next(&mut self) -> Option<CrossGroupOrdering> {
        if self.done {
            return None;
        }
        if self.started && !next_permutation(&mut self.choice) {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(self.ordering())
    }
}

pub fn enumerate_interleavings(groups: &[GroupedSequence], budget: EnumerationBudget) -> Result<Interleavings> {
    if groups.is_empty() {
        return Err(Error::input("no groups to interleave"));
    }
    let lengths: Vec<usize> = groups.iter().map(GroupedSequence::len).collect();
    let count = multinomial(&lengths);
    match count {
        Some(c) if c <= budget.max_orderings => {}
        Some(c) => {
            return Err(Error::Resource(format!(
                "{c} interleavings exceed the enumeration budget of {}",
                budget.max_orderings
            )))
        }
        None => return Err(Error::Resource("interleaving count overflows u128".into())),
    }
    Ok(Interleavings {
        groups: groups.iter().map(|g| g.group().to_string()).collect(),
        choice: lengths
            .iter()
            .enumerate()
            .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
            .collect(),
        started: false,
        done: false,
    })
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub ordering: CrossGroupOrdering,
    /// `J = AUC − λ·D`.
    pub objective: f64,
    pub score: Score,
    pub utility: MetricValue,
    pub disparity: Frac,
}

/// `J` with exact parts. With a single group, or at `λ = 0` when the
/// disparity is undefined, the disparity counts as zero.
pub(crate) fn exact_j(list: &RankedList, config: &ObjectiveConfig) -> Result<(MetricValue, Score)> {
    let utility = auc(list, TiePolicy::Strict)?;
    let disparity = if list.groups().len() < 2 {
        Frac::ZERO
    } else {
        match disparity_term(list, config) {
            Ok(d) => d,
            Err(Error::UndefinedMetric(_)) if config.lambda == 0.0 => Frac::ZERO,
            Err(e) => return Err(e),
        }
    };
    Ok((utility, Score::new(utility.as_frac(), disparity)))
}

/// The interleaving maximising `J`; the first one found wins ties.
pub fn oracle_best(
    groups: &[GroupedSequence],
    config: &ObjectiveConfig,
    budget: EnumerationBudget,
) -> Result<OracleResult> {
    config.validate()?;
    let lambda = config.exact_lambda();
    let mut best: Option<(CrossGroupOrdering, MetricValue, Score)> = None;
    for ordering in enumerate_interleavings(groups, budget)? {
        let list = RankedList::from_ordering(&ordering, groups)?;
        let (utility, score) = exact_j(&list, config)?;
        if best
            .as_ref()
            .is_none_or(|(_, _, b)| score.cmp_at(b, &lambda) == Ordering::Greater)
        {
            best = Some((ordering, utility, score));
        }
    }
    let (ordering, utility, score) = best.expect("at least one interleaving");
    Ok(OracleResult {
        objective: score.value(config.lambda),
        disparity: score.disparity,
        ordering,
        score,
        utility,
    })
}

/// Merges groups by within-group quantile: item `t` (1-based) of group `g`
/// gets key `(t − 0.5)/n_g`; smaller keys rank higher, ties go to the
/// earlier group.
pub fn proportional_merge(groups: &[GroupedSequence]) -> Result<CrossGroupOrdering> {
    if groups.is_empty() {
        return Err(Error::input("no groups to merge"));
    }
    let mut entries: Vec<OrderEntry> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, seq)| (0..seq.len()).map(move |position| OrderEntry { group: g, position }))
        .collect();
    // (2t − 1)/(2n) compared by cross-multiplication
    entries.sort_by(|x, y| {
        let (nx, ny) = (groups[x.group].len() as u128, groups[y.group].len() as u128);
        let (kx, ky) = (2 * x.position as u128 + 1, 2 * y.position as u128 + 1);
        (kx * ny).cmp(&(ky * nx)).then(x.group.cmp(&y.group))
    });
    Ok(CrossGroupOrdering::new(
        groups.iter().map(|g| g.group().to_string()).collect(),
        entries,
        Provenance::Merge,
    ))
}

#[derive(Debug, Clone)]
pub struct Prop1Report {
    pub metric: DisparityMetric,
    pub bound: Frac,
    pub witness: CrossGroupOrdering,
    pub witness_disparity: MetricValue,
    pub holds: bool,
}

fn frac_min(a: Frac, b: Frac) -> Frac {
    if a.exact_cmp(&b).is_le() {
        a
    } else {
        b
    }
}

fn frac_max(a: Frac, b: Frac) -> Frac {
    if a.exact_cmp(&b).is_ge() {
        a
    } else {
        b
    }
}

/// The guaranteed-achievable disparity for a two-group instance.
pub fn prop1_bound(a: &GroupedSequence, b: &GroupedSequence, metric: DisparityMetric) -> Result<Frac> {
    let r = |n: usize, d: usize| Frac::new(n as i128, d as i128);
    let (n1a, n0a, n1b, n0b) = (a.positives(), a.negatives(), b.positives(), b.negatives());
    let n0 = n0a + n0b;
    match metric {
        DisparityMetric::Urf => {
            if a.is_empty() || b.is_empty() {
                return Err(Error::undefined("URF bound needs non-empty groups"));
            }
            Ok(frac_min(r(1, a.len()), r(1, b.len())))
        }
        DisparityMetric::Xauc => {
            if n1a * n0a * n1b * n0b == 0 {
                return Err(Error::undefined(
                    "xAUC bound needs positives and negatives in both groups",
                ));
            }
            Ok(frac_min(frac_max(r(1, n1b), r(1, n0b)), frac_max(r(1, n1a), r(1, n0a))))
        }
        DisparityMetric::Prf => {
            if n1a * n1b * n0 == 0 {
                return Err(Error::undefined(
                    "PRF bound needs positives in both groups and some negative",
                ));
            }
            Ok(frac_min(
                frac_max(r(n0b, n1a * n0), r(1, n0)),
                frac_max(r(n0a, n1b * n0), r(1, n0)),
            ))
        }
    }
}

/// Finds the interleaving of minimum disparity and checks it against
/// [`prop1_bound`].
pub fn verify_prop1(
    groups: &[GroupedSequence],
    metric: DisparityMetric,
    budget: EnumerationBudget,
) -> Result<Prop1Report> {
    let [a, b] = groups else {
        return Err(Error::input(format!("needs exactly two groups, got {}", groups.len())));
    };
    let bound = prop1_bound(a, b, metric)?;
    let mut best: Option<(CrossGroupOrdering, MetricValue)> = None;
    for ordering in enumerate_interleavings(groups, budget)? {
        let list = RankedList::from_ordering(&ordering, groups)?;
        let d = pair_disparity(&list, metric, a.group(), b.group(), TiePolicy::Strict)?;
        if best.as_ref().is_none_or(|(_, m)| d.exact_cmp(m).is_lt()) {
            best = Some((ordering, d));
        }
    }
    let (witness, witness_disparity) = best.expect("at least one interleaving");
    Ok(Prop1Report {
        metric,
        holds: witness_disparity.as_frac().exact_cmp(&bound).is_le(),
        bound,
        witness,
        witness_disparity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::tests::e1_samples;
    use crate::ranking::{sort_into_groups, validate_ordering, Label, Sample};

    fn seq(name: &str, labels: &[bool]) -> GroupedSequence {
        let items = labels
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                Sample::new(
                    i,
                    1.0 - i as f64 / 100.0,
                    if p { Label::Positive } else { Label::Negative },
                    name,
                )
                .with_id(format!("{name}{}", i + 1))
            })
            .collect();
        GroupedSequence::new(name, items).unwrap()
    }

    #[test]
    fn counts_match_multinomials() {
        let e1 = sort_into_groups(&e1_samples()).unwrap();
        let all: Vec<_> = enumerate_interleavings(&e1, EnumerationBudget::default())
            .unwrap()
            .collect();
        assert_eq!(all.len(), 6);
        for o in &all {
            assert!(validate_ordering(o, &e1).is_valid());
        }
        let one = [seq("a", &[true]), seq("b", &[false])];
        assert_eq!(
            enumerate_interleavings(&one, EnumerationBudget::default())
                .unwrap()
                .count(),
            2
        );
        let three = [seq("a", &[true, false]), seq("b", &[true, false]), seq("c", &[false])];
        assert_eq!(
            enumerate_interleavings(&three, EnumerationBudget::default())
                .unwrap()
                .count(),
            30
        );
        assert_eq!(multinomial(&[2, 2, 2]), Some(90));
        assert_eq!(multinomial(&[8, 8]), Some(12870));
    }

    #[test]
    fn budget_reports_count() {
        let big = [seq("a", &[true; 10]), seq("b", &[false; 10])];
        let err = enumerate_interleavings(&big, EnumerationBudget { max_orderings: 1000 }).unwrap_err();
        assert!(err.to_string().contains("184756"), "{err}");
    }

    #[test]
    fn e1_oracle() {
        let e1 = sort_into_groups(&e1_samples()).unwrap();
        let c0 = ObjectiveConfig::new(0.0, DisparityMetric::Xauc).unwrap();
        let r = oracle_best(&e1, &c0, EnumerationBudget::default()).unwrap();
        assert_eq!(r.utility.value(), 0.75);
        assert_eq!(r.ordering.to_string(), "[a1, b1, b2, a2]");
        let c10 = ObjectiveConfig::new(10.0, DisparityMetric::Xauc).unwrap();
        let r = oracle_best(&e1, &c10, EnumerationBudget::default()).unwrap();
        assert_eq!(r.ordering.to_string(), "[a1, b1, b2, a2]");
        assert_eq!(r.disparity, Frac::ZERO);
        // J = G + C_within/k = 0.5 + 0.25
        assert_eq!(r.objective, 0.75);
    }

    #[test]
    fn single_group_is_identity() {
        let g = [seq("a", &[true, false, true])];
        let c = ObjectiveConfig::new(1.0, DisparityMetric::Xauc).unwrap();
        let r = oracle_best(&g, &c, EnumerationBudget::default()).unwrap();
        assert_eq!(r.ordering.to_string(), "[a1, a2, a3]");
        assert_eq!(r.objective, 0.5);
        assert_eq!(proportional_merge(&g).unwrap().to_string(), "[a1, a2, a3]");
    }

    #[test]
    fn proportional_merge_examples() {
        let g = [seq("a", &[true, false]), seq("b", &[true, false])];
        let o = proportional_merge(&g).unwrap();
        assert_eq!(o.to_string(), "[a1, b1, a2, b2]");
        let list = RankedList::from_ordering(&o, &g).unwrap();
        assert_eq!(
            pair_disparity(&list, DisparityMetric::Urf, "a", "b", TiePolicy::Strict)
                .unwrap()
                .value(),
            0.5
        );

        let g = [seq("a", &[true]), seq("b", &[true, false, false])];
        let o = proportional_merge(&g).unwrap();
        assert_eq!(o.to_string(), "[b1, a1, b2, b3]");
        let list = RankedList::from_ordering(&o, &g).unwrap();
        let d = pair_disparity(&list, DisparityMetric::Urf, "a", "b", TiePolicy::Strict).unwrap();
        assert_eq!(d, MetricValue::new(1, 3));
    }

    #[test]
    fn prop1_examples() {
        let e1 = sort_into_groups(&e1_samples()).unwrap();
        let r = verify_prop1(&e1, DisparityMetric::Xauc, EnumerationBudget::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.bound, Frac::new(1, 1));
        assert_eq!(r.witness.to_string(), "[a1, b1, b2, a2]");
        assert_eq!(r.witness_disparity.value(), 0.0);

        let a = seq("a", &[true, false, true, false]);
        let b = seq("b", &[true, true, false, false, false]);
        assert_eq!(prop1_bound(&a, &b, DisparityMetric::Urf).unwrap().to_f64(), 0.2);
    }
}
