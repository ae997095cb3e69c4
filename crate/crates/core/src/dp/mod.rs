//! Optimal interleaving of two within-group rankings.
//!
//! The fit walks the `(n_a + 1) × (n_b + 1)` lattice whose monotone paths
//! are exactly the orderings that keep each group's internal order. See
//! [`Lattice`] for the per-cell completion value used to pick each cell's
//! best predecessor.

mod engine;

use std::time::Duration;

pub use engine::CompletionRule;
pub(crate) use engine::{Engine, EngineOutput};

use crate::error::{Error, Result};
use crate::exact::Score;
use crate::metrics::{DisparityMetric, RankedList};
use crate::objective::{objective_j, Mode, ObjectiveConfig};
use crate::ranking::{CrossGroupOrdering, GroupedSequence, OrderEntry, Provenance};

/// Default cap on lattice memory (backpointers plus rolling state).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub memory_budget: u64,
    pub completion: CompletionRule,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            completion: CompletionRule::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeStats {
    pub cells: u128,
    pub bytes: u128,
    pub runtime: Duration,
}

impl From<&EngineOutput> for LatticeStats {
    fn from(o: &EngineOutput) -> Self {
        LatticeStats {
            cells: o.cells,
            bytes: o.lattice_bytes,
            runtime: o.runtime,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub ordering: CrossGroupOrdering,
    /// Two-group objective `G` of the fitted ordering.
    pub objective: f64,
    /// `J = AUC − λ·D` of the fitted ordering, if AUC is defined.
    pub auc_objective: Option<f64>,
    /// Exact utility and disparity behind `objective`.
    pub score: Score,
    pub lambda: f64,
    pub stats: LatticeStats,
}

impl FitResult {
    /// Disparity term of the fitted ordering (signed in signed mode).
    pub fn disparity(&self) -> f64 {
        self.score.disparity.to_f64()
    }
}

fn pair_defined(metric: DisparityMetric, (n1g, n0g): (u64, u64), (n1h, n0h): (u64, u64), n0_total: u64) -> bool {
    match metric {
        DisparityMetric::Xauc => n1g * n0h > 0 && n1h * n0g > 0,
        DisparityMetric::Prf => n1g * n1h * n0_total > 0,
        DisparityMetric::Urf => n1g + n0g > 0 && n1h + n0h > 0,
    }
}

/// Checks that every term the objective needs has a non-zero denominator.
/// At `λ = 0` the disparity does not affect the fit, so one defined pair is
/// enough. Returns the signed-mode group indices.
pub(crate) fn check_defined(
    names: &[String],
    counts: &[(u64, u64)],
    config: &ObjectiveConfig,
) -> Result<Option<(usize, usize)>> {
    let index = |name: &str| {
        names
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| Error::input(format!("unknown group {name:?} in signed mode")))
    };
    let signed = match &config.mode {
        Mode::Absolute => None,
        Mode::Signed { favored, disfavored } => {
            if names.len() != 2 {
                return Err(Error::input(format!(
                    "signed mode needs exactly two groups, got {}",
                    names.len()
                )));
            }
            Some((index(favored)?, index(disfavored)?))
        }
    };
    let n0_total: u64 = counts.iter().map(|c| c.1).sum();
    let mut undefined = None;
    let mut any_defined = false;
    for g in 0..names.len() {
        for h in g + 1..names.len() {
            if pair_defined(config.metric, counts[g], counts[h], n0_total) {
                any_defined = true;
            } else if undefined.is_none() {
                undefined = Some((g, h));
            }
        }
    }
    let fail = |(g, h): (usize, usize)| {
        Err(Error::undefined(format!(
            "{} is undefined for groups {:?} and {:?}: missing positives or negatives",
            config.metric, names[g], names[h]
        )))
    };
    match undefined {
        Some(pair) if config.lambda > 0.0 || !any_defined => fail(pair),
        _ => Ok(signed),
    }
}

pub(crate) fn side_items(seq: &GroupedSequence, g: usize) -> Vec<(usize, bool)> {
    seq.items().iter().map(|s| (g, s.label.is_positive())).collect()
}

pub(crate) fn counts_of(seqs: &[&GroupedSequence]) -> Vec<(u64, u64)> {
    seqs.iter()
        .map(|s| (s.positives() as u64, s.negatives() as u64))
        .collect()
}

fn build_two(
    a: &GroupedSequence,
    b: &GroupedSequence,
    config: &ObjectiveConfig,
    options: &FitOptions,
) -> Result<Engine> {
    config.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::undefined("both groups need at least one item"));
    }
    if a.group() == b.group() {
        return Err(Error::input(format!("both sequences belong to group {:?}", a.group())));
    }
    let names = vec![a.group().to_string(), b.group().to_string()];
    let signed = check_defined(&names, &counts_of(&[a, b]), config)?;
    Ok(Engine::new(
        &[side_items(a, 0), side_items(b, 1)],
        2,
        config.metric,
        signed,
        options.completion,
        config.exact_lambda(),
    ))
}

pub fn fit_two_group(a: &GroupedSequence, b: &GroupedSequence, config: &ObjectiveConfig) -> Result<FitResult> {
    fit_two_group_with(a, b, config, &FitOptions::default())
}

pub fn fit_two_group_with(
    a: &GroupedSequence,
    b: &GroupedSequence,
    config: &ObjectiveConfig,
    options: &FitOptions,
) -> Result<FitResult> {
    let engine = build_two(a, b, config, options)?;
    let out = engine.run(options.memory_budget)?;
    let ordering = CrossGroupOrdering::new(
        vec![a.group().to_string(), b.group().to_string()],
        out.path
            .iter()
            .map(|&(group, position)| OrderEntry { group, position })
            .collect(),
        Provenance::DpFit,
    );
    let groups = [a.clone(), b.clone()];
    let list = RankedList::from_ordering(&ordering, &groups)?;
    let auc_objective = objective_j(&list, config).ok().map(|v| v.value);
    Ok(FitResult {
        objective: out.score.value(config.lambda),
        score: out.score,
        auc_objective,
        lambda: config.lambda,
        stats: LatticeStats::from(&out),
        ordering,
    })
}

/// Which sequence a path step draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    A,
    B,
}

/// Counts carried along a lattice path ending at cell `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathState {
    coords: [usize; 2],
    counts: Vec<u64>,
}

impl PathState {
    pub fn i(&self) -> usize {
        self.coords[0]
    }

    pub fn j(&self) -> usize {
        self.coords[1]
    }

    /// Placed a-positives above placed b-negatives.
    pub fn w_ab(&self) -> u64 {
        self.counts[1]
    }

    pub fn w_ba(&self) -> u64 {
        self.counts[2]
    }

    /// Placed a-items above placed b-items.
    pub fn u_ab(&self) -> u64 {
        self.counts[5]
    }

    pub fn u_ba(&self) -> u64 {
        self.counts[6]
    }
}

/// Two-group lattice with per-cell completion values.
///
/// The completion of a partial path ranks every unplaced item below every
/// placed one, keeping each group's internal order. Its utility term counts
/// correct pairs over all of `k = n_1·n_0`. Its disparity term follows the
/// [`CompletionRule`].
pub struct Lattice {
    engine: Engine,
    lambda: f64,
}

impl Lattice {
    pub fn new(a: &GroupedSequence, b: &GroupedSequence, config: &ObjectiveConfig) -> Result<Lattice> {
        Lattice::with_options(a, b, config, &FitOptions::default())
    }

    pub fn with_options(
        a: &GroupedSequence,
        b: &GroupedSequence,
        config: &ObjectiveConfig,
        options: &FitOptions,
    ) -> Result<Lattice> {
        Ok(Lattice {
            engine: build_two(a, b, config, options)?,
            lambda: config.lambda,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.engine.side_len(0), self.engine.side_len(1))
    }

    pub fn origin(&self) -> PathState {
        PathState {
            coords: [0, 0],
            counts: vec![0; self.engine.state_len()],
        }
    }

    pub fn step(&self, state: &PathState, step: Step) -> Result<PathState> {
        let d = match step {
            Step::A => 0,
            Step::B => 1,
        };
        let (na, nb) = self.dims();
        if state.coords[d] >= [na, nb][d] {
            return Err(Error::input(format!(
                "step {step:?} leaves the lattice at {:?}",
                state.coords
            )));
        }
        let mut next = state.clone();
        self.engine.apply(&state.coords, d, &mut next.counts);
        next.coords[d] += 1;
        Ok(next)
    }

    pub fn state_for_path(&self, path: &[Step]) -> Result<PathState> {
        path.iter().try_fold(self.origin(), |s, &step| self.step(&s, step))
    }

    pub fn ghat_score(&self, i: usize, j: usize, state: &PathState) -> Result<Score> {
        if state.coords != [i, j] {
            return Err(Error::Invariant(format!(
                "path state ends at ({}, {}), not ({i}, {j})",
                state.i(),
                state.j()
            )));
        }
        Ok(self.engine.evaluate(&state.coords, &state.counts))
    }

    pub fn ghat(&self, i: usize, j: usize, state: &PathState) -> Result<f64> {
        Ok(self.ghat_score(i, j, state)?.value(self.lambda))
    }

    /// Bytes a full fit of this lattice would allocate.
    pub fn memory_estimate(&self) -> u128 {
        self.engine.lattice_bytes().unwrap_or(u128::MAX)
    }
}
