use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};
use xorder_core::metrics::auc;
use xorder_core::multigroup::{fit_groups, MergePlan, MergePolicy, Strategy};
use xorder_core::objective::disparity_term;
use xorder_core::ranking::sort_into_groups;
use xorder_core::sampling::SubsamplePlan;
use xorder_core::transfer::{adjust_training_scores, save_mapping, MappingMeta, ScoreMapping};
use xorder_core::{FitOptions, ObjectiveConfig, RankedList, Sample, TiePolicy};

use crate::data::Dataset;
use crate::format::{num, opt};
use crate::{json_text, CliError, DataArgs, MergeArg, ObjectiveArgs, StrategyArg};

/// Fitting flags shared by `adjust` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Strategy for three or more groups.
    #[arg(long, value_enum, default_value = "iterative")]
    pub multigroup: StrategyArg,
    #[arg(long, value_enum, default_value = "by-size-desc")]
    pub merge_policy: MergeArg,
    /// Explicit comma-separated merge order; overrides --merge-policy.
    #[arg(long, value_delimiter = ',')]
    pub merge_order: Option<Vec<String>>,
    /// Fit on equidistant subsamples of this many items per group.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Group whose scores stay fixed; defaults to the first merge-plan group.
    #[arg(long)]
    pub reference: Option<String>,
    /// Lattice memory cap in bytes.
    #[arg(long)]
    pub memory_budget: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AdjustArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda: f64,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out_mapping: PathBuf,
    #[arg(long)]
    pub out_scores: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub mapping: ScoreMapping,
    pub objective: Option<f64>,
    pub plan: Vec<String>,
}

/// AUC and disparity of a scored sample set; `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub auc: Option<f64>,
    pub disparity: Option<f64>,
}

impl Measured {
    pub fn of(samples: &[Sample], config: &ObjectiveConfig) -> Result<Measured, CliError> {
        let list = RankedList::from_samples(samples)?;
        Ok(Measured {
            auc: auc(&list, TiePolicy::Strict).ok().map(|m| m.value()),
            disparity: disparity_term(&list, config).ok().map(|d| d.to_f64()),
        })
    }

    pub fn json(&self) -> Value {
        json!({ "auc": opt(self.auc), "disparity": opt(self.disparity) })
    }
}

impl FitArgs {
    fn plan(&self, groups: &[xorder_core::GroupedSequence]) -> Result<MergePlan, CliError> {
        let (policy, order) = match &self.merge_order {
            Some(o) => (MergePolicy::UserList, Some(o.clone())),
            None => (self.merge_policy.into(), None),
        };
        Ok(MergePlan::new(policy, groups, order)?)
    }

    pub fn fit(&self, samples: &[Sample], config: &ObjectiveConfig) -> Result<Fitted, CliError> {
        let groups = sort_into_groups(samples)?;
        if groups.len() < 2 {
            return Err(CliError::Input(format!(
                "fitting needs at least two groups, found {}",
                groups.len()
            )));
        }
        if self.multigroup == StrategyArg::Exact3d && groups.len() != 3 {
            return Err(CliError::Usage(format!(
                "--multigroup exact3d needs exactly three groups, found {}",
                groups.len()
            )));
        }
        let plan = self.plan(&groups)?;
        let fit_on = match self.subsample {
            Some(m) => SubsamplePlan::new(&groups, m)?.apply(&groups),
            None => groups.clone(),
        };
        let strategy = match self.multigroup {
            StrategyArg::Exact3d => Strategy::Exact3d,
            StrategyArg::Iterative => Strategy::Iterative(plan.clone()),
        };
        let mut options = FitOptions::default();
        if let Some(b) = self.memory_budget {
            options.memory_budget = b;
        }
        let fit = fit_groups(&fit_on, config, &strategy, &options)?;
        let reference = match &self.reference {
            Some(r) => r.clone(),
            None => plan.order[0].clone(),
        };
        let meta = MappingMeta {
            lambda: config.lambda,
            metric: config.metric,
            mode: config.mode.clone(),
            counts: groups
                .iter()
                .map(|g| (g.group().to_string(), g.len()))
                .collect::<BTreeMap<_, _>>(),
            objective: fit.objective,
        };
        let (_, mapping) = adjust_training_scores(&fit.ordering, &fit_on, &reference, meta)?;
        Ok(Fitted {
            mapping,
            objective: fit.objective,
            plan: plan.order,
        })
    }
}

pub fn run(args: &AdjustArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let data = Dataset::read(&args.train, &args.data.columns())?;
    let config = args.fit.objective.config(args.lambda)?;
    let fitted = args.fit.fit(&data.samples, &config).map_err(|e| match e {
        CliError::Resource(m) => {
            CliError::Resource(format!("{m}; retry with --subsample to fit on fewer samples per group"))
        }
        other => other,
    })?;
    let adjusted = fitted.mapping.apply_samples(&data.samples)?;
    let scores: Vec<f64> = adjusted.iter().map(|s| s.score).collect();

    save_mapping(&fitted.mapping, &args.out_mapping)?;
    data.write_scores_to(&args.out_scores, &scores)?;

    let before = Measured::of(&data.samples, &config)?;
    let after = Measured::of(&adjusted, &config)?;
    let summary = json!({
        "lambda": num(config.lambda),
        "metric": config.metric.token(),
        "mode": config.mode.token(),
        "reference_group": fitted.mapping.reference_group,
        "merge_plan": fitted.plan,
        "subsample": args.fit.subsample,
        "objective": opt(fitted.objective),
        "before": before.json(),
        "after": after.json(),
    });
    stdout
        .write_all(json_text(&summary).as_bytes())
        .map_err(|e| CliError::Input(format!("stdout: {e}")))
}
