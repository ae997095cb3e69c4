use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};
use xorder_core::transfer::load_mapping;

use crate::data::Dataset;
use crate::format::opt;
use crate::{json_text, CliError, DataArgs};

#[derive(Debug, Clone, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ApplyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mapping = load_mapping(&args.mapping)?;
    let data = Dataset::read(&args.input, &args.data.columns())?;

    let mut by_group: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in &data.samples {
        if s.group != mapping.reference_group && !mapping.groups.contains_key(&s.group) {
            return Err(CliError::Input(format!(
                "{}: row {} has group {:?}, which the mapping does not cover",
                args.input.display(),
                s.row + 1,
                s.group
            )));
        }
        by_group.entry(&s.group).or_default().push(s.score);
    }

    let adjusted = mapping.apply_samples(&data.samples)?;
    let scores: Vec<f64> = adjusted.iter().map(|s| s.score).collect();
    data.write_scores_to(&args.out, &scores)?;

    let coverage: Vec<Value> = by_group
        .iter()
        .map(|(g, scores)| {
            let reference = *g == mapping.reference_group;
            json!({
                "group": g,
                "rows": scores.len(),
                "reference": reference,
                "coverage": if reference { Value::Null } else { opt(mapping.coverage(g, scores)) },
            })
        })
        .collect();
    let summary = json!({
        "reference_group": mapping.reference_group,
        "rows": data.len(),
        "groups": coverage,
    });
    stdout
        .write_all(json_text(&summary).as_bytes())
        .map_err(|e| CliError::Input(format!("stdout: {e}")))
}
