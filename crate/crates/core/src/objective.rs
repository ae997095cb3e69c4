//! Objective configuration and evaluation of complete orderings.
//!
//! Two forms of the objective are used:
//!
//! * `J = AUC − λ·D`, the utility/disparity trade-off over a full ranking;
//! * `G = (k_ab/k)·xAUC(a,b) + (k_ba/k)·xAUC(b,a) − λ·D`, the two-group form
//!   that drops the within-group pairs (a constant for a fixed pair of
//!   sequences), so `J = G + C_within / k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Frac, Lambda, Score};
use crate::metrics::{auc, directed_terms, multigroup_disparity, xauc_idx, DisparityMetric, MetricValue, RankedList};
use crate::ranking::{CrossGroupOrdering, GroupedSequence, TiePolicy};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Penalise `|D(a,b)|`.
    Absolute,
    /// Penalise the signed gap `term(favored) − term(disfavored)`.
    Signed { favored: String, disfavored: String },
}

impl Mode {
    pub fn token(&self) -> &'static str {
        match self {
            Mode::Absolute => "absolute",
            Mode::Signed { .. } => "signed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig {
    pub lambda: f64,
    pub metric: DisparityMetric,
    pub mode: Mode,
}

impl ObjectiveConfig {
    pub fn new(lambda: f64, metric: DisparityMetric) -> Result<Self> {
        let config = ObjectiveConfig {
            lambda,
            metric,
            mode: Mode::Absolute,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn signed(
        lambda: f64,
        metric: DisparityMetric,
        favored: impl Into<String>,
        disfavored: impl Into<String>,
    ) -> Result<Self> {
        let config = ObjectiveConfig {
            lambda,
            metric,
            mode: Mode::Signed {
                favored: favored.into(),
                disfavored: disfavored.into(),
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut c = self.clone();
        c.lambda = lambda;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::input(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let Mode::Signed { favored, disfavored } = &self.mode {
            if favored == disfavored {
                return Err(Error::input("signed mode needs two distinct groups"));
            }
        }
        Ok(())
    }

    pub(crate) fn exact_lambda(&self) -> Lambda {
        Lambda::new(self.lambda).expect("validated lambda")
    }
}

/// A fully evaluated objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub score: Score,
    pub value: f64,
}

impl ObjectiveValue {
    fn new(score: Score, lambda: f64) -> Self {
        ObjectiveValue {
            value: score.value(lambda),
            score,
        }
    }
}

/// The disparity term of the objective over a complete ranking; signed in
/// signed mode.
pub fn disparity_term(list: &RankedList, config: &ObjectiveConfig) -> Result<Frac> {
    match &config.mode {
        Mode::Absolute => Ok(multigroup_disparity(list, config.metric, TiePolicy::Strict)?
            .value
            .as_frac()),
        Mode::Signed { favored, disfavored } => {
            let (f, d) = (list.group_index(favored)?, list.group_index(disfavored)?);
            let (x, y) = directed_terms(list, config.metric, f, d, TiePolicy::Strict)?;
            Ok(x.as_frac() - y.as_frac())
        }
    }
}

/// `J = AUC − λ·D` over a complete ranking.
pub fn objective_j(list: &RankedList, config: &ObjectiveConfig) -> Result<ObjectiveValue> {
    config.validate()?;
    let utility = auc(list, TiePolicy::Strict)?;
    let disparity = disparity_term(list, config)?;
    Ok(ObjectiveValue::new(
        Score::new(utility.as_frac(), disparity),
        config.lambda,
    ))
}

/// Cross-group utility `(W_ab + W_ba) / k` of a two-group ranking, where
/// `W` counts correctly ordered cross-group (positive, negative) pairs.
/// Zero when the ranking has no positives or no negatives.
pub fn cross_utility(list: &RankedList) -> Result<Frac> {
    if list.groups().len() != 2 {
        return Err(Error::input("cross-group utility needs exactly two groups"));
    }
    let n1 = list.entries().iter().filter(|e| e.positive).count() as i128;
    let n0 = list.entries().len() as i128 - n1;
    let k = n1 * n0;
    if k == 0 {
        return Ok(Frac::ZERO);
    }
    let wins = |f, t| xauc_idx(list, f, t, TiePolicy::Strict).map_or(0, |m: MetricValue| m.numerator as i128);
    Ok(Frac::new(wins(0, 1) + wins(1, 0), k))
}

/// The two-group objective `G` of an ordering.
pub fn objective_g(
    ordering: &CrossGroupOrdering,
    groups: &[GroupedSequence],
    config: &ObjectiveConfig,
) -> Result<ObjectiveValue> {
    config.validate()?;
    if ordering.groups().len() != 2 {
        return Err(Error::input(format!(
            "two-group objective needs exactly two groups, ordering has {}",
            ordering.groups().len()
        )));
    }
    let list = RankedList::from_ordering(ordering, groups)?;
    let utility = cross_utility(&list)?;
    let disparity = disparity_term(&list, config)?;
    Ok(ObjectiveValue::new(Score::new(utility, disparity), config.lambda))
}
