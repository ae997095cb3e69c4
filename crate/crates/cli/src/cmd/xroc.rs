use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use xorder_core::metrics::{xauc, xroc_curve};
use xorder_core::{RankedList, TiePolicy};

use crate::data::Dataset;
use crate::format::{fmt_f64, num};
use crate::{emit, json_text, path_arg, CliError, DataArgs};

#[derive(Debug, Clone, Args)]
pub struct XrocArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// `a,b`: positives of `a` against negatives of `b`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub pair: Vec<String>,
    /// Curve points as CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &XrocArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let [a, b] = &args.pair[..] else {
        return Err(CliError::Usage("--pair takes exactly two groups".into()));
    };
    let data = Dataset::read(&args.input, &args.data.columns())?;
    let list = RankedList::from_samples(&data.samples)?;
    let curve = xroc_curve(&list, a, b)?;
    let reference = xauc(&list, a, b, TiePolicy::Half)?;

    let mut table = String::from("fpr,tpr\n");
    for &(x, y) in &curve.points {
        table.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(y)));
    }
    let summary = json!({
        "a": a,
        "b": b,
        "points": curve.points.len(),
        "area": num(curve.area()),
        "xauc_half_ties": num(reference.value()),
    });
    match &args.out {
        Some(_) => {
            emit(path_arg(&args.out), stdout, &table)?;
            emit(None, stdout, &json_text(&summary))
        }
        None => emit(None, stdout, &table),
    }
}
