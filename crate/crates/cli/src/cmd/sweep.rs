use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use xorder_core::{ObjectiveConfig, Sample};

use crate::cmd::adjust::{FitArgs, Measured};
use crate::data::Dataset;
use crate::format::fmt_f64;
use crate::{emit, path_arg, CliError, DataArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated lambda values.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub lambdas: Option<Vec<f64>>,
    /// `start:stop:count` grid.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value = "linear")]
    pub spacing: Spacing,
    /// Run the fits one after another.
    #[arg(long)]
    pub serial: bool,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub train: Measured,
    pub test: Measured,
    pub error: Option<String>,
}

pub fn grid(spec: &str, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--grid expects start:stop:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let steps = (count - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..count).map(|i| start + (stop - start) * i as f64 / steps).collect()),
        Spacing::Geometric => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(CliError::Usage("a geometric grid needs positive endpoints".into()));
            }
            let ratio = (stop / start).ln();
            Ok((0..count).map(|i| start * (ratio * i as f64 / steps).exp()).collect())
        }
    }
}

impl SweepArgs {
    pub fn lambda_values(&self) -> Result<Vec<f64>, CliError> {
        let values = match (&self.lambdas, &self.grid) {
            (Some(l), _) => l.clone(),
            (None, Some(g)) => grid(g, self.spacing)?,
            (None, None) => return Err(CliError::Usage("give --lambdas or --grid".into())),
        };
        if values.is_empty() {
            return Err(CliError::Usage("the lambda list is empty".into()));
        }
        if let Some(l) = values.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(CliError::Usage(format!(
                "lambda must be finite and non-negative, got {l}"
            )));
        }
        Ok(values)
    }
}

fn one(fit: &FitArgs, base: &ObjectiveConfig, lambda: f64, train: &[Sample], test: &[Sample]) -> SweepRow {
    let result = (|| {
        let config = base.with_lambda(lambda)?;
        let fitted = fit.fit(train, &config)?;
        let on_train = fitted.mapping.apply_samples(train)?;
        let on_test = fitted.mapping.apply_samples(test)?;
        Ok::<_, CliError>((Measured::of(&on_train, &config)?, Measured::of(&on_test, &config)?))
    })();
    let none = Measured {
        auc: None,
        disparity: None,
    };
    match result {
        Ok((train, test)) => SweepRow {
            lambda,
            train,
            test,
            error: None,
        },
        Err(e) => SweepRow {
            lambda,
            train: none,
            test: none,
            error: Some(e.to_string()),
        },
    }
}

/// Fits every lambda; rows come back in input order whether or not they ran in parallel.
pub fn sweep(
    fit: &FitArgs,
    base: &ObjectiveConfig,
    lambdas: &[f64],
    train: &[Sample],
    test: &[Sample],
    serial: bool,
) -> Vec<SweepRow> {
    if serial {
        lambdas.iter().map(|&l| one(fit, base, l, train, test)).collect()
    } else {
        lambdas.par_iter().map(|&l| one(fit, base, l, train, test)).collect()
    }
}

pub fn table(rows: &[SweepRow]) -> String {
    let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "lambda",
        "train_auc",
        "train_disparity",
        "test_auc",
        "test_disparity",
        "error",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            fmt_f64(r.lambda),
            cell(r.train.auc),
            cell(r.train.disparity),
            cell(r.test.auc),
            cell(r.test.disparity),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn run(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let lambdas = args.lambda_values()?;
    let cols = args.data.columns();
    let train = Dataset::read(&args.train, &cols)?;
    let test = Dataset::read(&args.test, &cols)?;
    let base = args.fit.objective.config(0.0)?;
    let rows = sweep(&args.fit, &base, &lambdas, &train.samples, &test.samples, args.serial);
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("warning: lambda {}: {e}", fmt_f64(r.lambda));
        }
    }
    emit(path_arg(&args.out), stdout, &table(&rows))?;
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Input("every lambda in the sweep failed".into()));
    }
    Ok(())
}
