use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};
use xorder_core::metrics::{
    auc, delta_prf, delta_xauc, dominance_report, multigroup_disparity, prf, urf_pair, xauc, DominanceVerdict,
};
use xorder_core::{DisparityMetric, MetricValue, RankedList, TiePolicy};

use crate::data::Dataset;
use crate::format::num;
use crate::{emit, json_text, path_arg, CliError, DataArgs, TiesArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricSelector {
    All,
    Xauc,
    Prf,
    Urf,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub metric: MetricSelector,
    #[arg(long, value_enum, default_value = "strict")]
    pub ties: TiesArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl MetricSelector {
    fn wants(self, m: DisparityMetric) -> bool {
        match self {
            MetricSelector::All => true,
            MetricSelector::Xauc => m == DisparityMetric::Xauc,
            MetricSelector::Prf => m == DisparityMetric::Prf,
            MetricSelector::Urf => m == DisparityMetric::Urf,
        }
    }
}

/// Collects undefined metrics as `null` plus a warning.
struct Warnings(Vec<String>);

impl Warnings {
    fn value(&mut self, r: xorder_core::Result<MetricValue>) -> Value {
        match r {
            Ok(m) => num(m.value()),
            Err(e) => {
                self.0.push(e.to_string());
                Value::Null
            }
        }
    }
}

pub fn report(list: &RankedList, selector: MetricSelector, ties: TiePolicy) -> Value {
    let mut warn = Warnings(Vec::new());
    let names = list.groups().to_vec();

    let mut groups = Vec::new();
    for (g, name) in names.iter().enumerate() {
        let entries = list.entries().iter().filter(|e| e.group == g);
        let count = entries.clone().count();
        let positives = entries.filter(|e| e.positive).count();
        let mut row = Map::new();
        row.insert("group".into(), json!(name));
        row.insert("count".into(), json!(count));
        row.insert("positives".into(), json!(positives));
        if selector.wants(DisparityMetric::Prf) {
            row.insert("prf".into(), warn.value(prf(list, name, ties)));
        }
        groups.push(Value::Object(row));
    }

    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (&names[i], &names[j]);
            let mut row = Map::new();
            row.insert("a".into(), json!(a));
            row.insert("b".into(), json!(b));
            if selector.wants(DisparityMetric::Xauc) {
                row.insert("xauc_ab".into(), warn.value(xauc(list, a, b, ties)));
                row.insert("xauc_ba".into(), warn.value(xauc(list, b, a, ties)));
                row.insert("delta_xauc".into(), warn.value(delta_xauc(list, a, b, ties)));
            }
            if selector.wants(DisparityMetric::Prf) {
                row.insert("delta_prf".into(), warn.value(delta_prf(list, a, b, ties)));
            }
            if selector.wants(DisparityMetric::Urf) {
                match urf_pair(list, a, b, ties) {
                    Ok(u) => {
                        row.insert("urf_ab".into(), num(u.a_above_b.value()));
                        row.insert("urf_ba".into(), num(u.b_above_a.value()));
                        row.insert("delta_urf".into(), num(u.delta.value()));
                    }
                    Err(e) => {
                        warn.0.push(e.to_string());
                        for k in ["urf_ab", "urf_ba", "delta_urf"] {
                            row.insert(k.into(), Value::Null);
                        }
                    }
                }
            }
            pairs.push(Value::Object(row));
        }
    }

    let mut max = Map::new();
    for m in [DisparityMetric::Xauc, DisparityMetric::Prf, DisparityMetric::Urf] {
        if !selector.wants(m) {
            continue;
        }
        let v = match multigroup_disparity(list, m, ties) {
            Ok(d) if names.len() >= 2 => json!({ "value": num(d.value.value()), "pair": [d.pair.0, d.pair.1] }),
            _ => Value::Null,
        };
        max.insert(m.token().into(), v);
    }

    let dominance = match dominance_report(list, ties) {
        Ok(d) => {
            let verdict = match &d.verdict {
                DominanceVerdict::Dominant(g) => json!({ "kind": "dominant", "group": g }),
                DominanceVerdict::Cycle => json!({ "kind": "cycle" }),
                DominanceVerdict::Tie => json!({ "kind": "tie" }),
            };
            let matrix: Vec<Value> = d
                .pairwise
                .iter()
                .map(|row| Value::Array(row.iter().map(|c| c.map_or(Value::Null, |m| num(m.value()))).collect()))
                .collect();
            json!({ "verdict": verdict, "above": matrix })
        }
        Err(_) => Value::Null,
    };

    let auc = warn.value(auc(list, ties));
    json!({
        "rows": list.entries().len(),
        "ties": match ties { TiePolicy::Strict => "strict", TiePolicy::Half => "half" },
        "auc": auc,
        "groups": groups,
        "pairs": pairs,
        "max": max,
        "dominance": dominance,
        "warnings": warn.0,
    })
}

pub fn run(args: &MetricsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let data = Dataset::read(&args.input, &args.data.columns())?;
    let list = RankedList::from_samples(&data.samples)?;
    let value = report(&list, args.metric, args.ties.into());
    if let Some(w) = value["warnings"].as_array() {
        for m in w {
            eprintln!("warning: {}", m.as_str().unwrap_or_default());
        }
    }
    emit(path_arg(&args.out), stdout, &json_text(&value))
}
