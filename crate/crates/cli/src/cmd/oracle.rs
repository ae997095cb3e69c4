use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use xorder_core::oracle::{multinomial, oracle_best, EnumerationBudget};
use xorder_core::ranking::sort_into_groups;

use crate::data::Dataset;
use crate::format::num;
use crate::{emit, json_text, path_arg, CliError, DataArgs, ObjectiveArgs};

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Largest number of interleavings to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &OracleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let data = Dataset::read(&args.input, &args.data.columns())?;
    let config = args.objective.config(args.lambda)?;
    let groups = sort_into_groups(&data.samples)?;
    let lengths: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let count = multinomial(&lengths);
    if count.is_none_or(|c| c > args.budget) {
        let n = count.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string());
        return Err(CliError::Resource(format!(
            "{n} interleavings exceed the enumeration budget of {}",
            args.budget
        )));
    }
    let best = oracle_best(
        &groups,
        &config,
        EnumerationBudget {
            max_orderings: args.budget,
        },
    )?;
    let ids: Vec<&str> = best.ordering.resolve(&groups)?.iter().map(|s| s.id.as_str()).collect();
    let report = json!({
        "lambda": num(config.lambda),
        "metric": config.metric.token(),
        "mode": config.mode.token(),
        "interleavings": count.map(|c| c.to_string()),
        "objective": num(best.objective),
        "utility": num(best.utility.value()),
        "disparity": num(best.disparity.to_f64()),
        "witness": best.ordering.to_string(),
        "witness_ids": ids,
    });
    emit(path_arg(&args.out), stdout, &json_text(&report))
}
