//! Command-line surface for `xorder-core`: metrics reports, fitting and
//! transferring fair orderings, trade-off sweeps, the brute-force oracle and
//! xROC curves.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when a lattice
//! or enumeration budget is exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use xorder_core::multigroup::MergePolicy;
use xorder_core::{DisparityMetric, Mode, ObjectiveConfig, TiePolicy};

pub mod cmd;
pub mod data;
pub mod format;

use data::Columns;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<xorder_core::Error> for CliError {
    fn from(e: xorder_core::Error) -> Self {
        match e {
            xorder_core::Error::Resource(_) => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "xorder",
    version,
    about = "Fair bipartite ranking by cross-group re-ordering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// AUC, xAUC, PRF and URF with their gaps, plus group dominance.
    Metrics(cmd::metrics::MetricsArgs),
    /// Fit a fair ordering on training data and write the score mapping.
    Adjust(cmd::adjust::AdjustArgs),
    /// Map scores of new data through a saved mapping.
    Apply(cmd::apply::ApplyArgs),
    /// Fit over a grid of lambda values and tabulate train/test trade-offs.
    Sweep(cmd::sweep::SweepArgs),
    /// Exhaustive search for the best ordering on a small input.
    Oracle(cmd::oracle::OracleArgs),
    /// xROC curve points for one ordered group pair.
    Xroc(cmd::xroc::XrocArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, default_value = "score")]
    pub score_col: String,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    #[arg(long, default_value = "group")]
    pub group_col: String,
    /// Defaults to a column named `id` if present.
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
}

impl DataArgs {
    pub fn columns(&self) -> Columns {
        Columns {
            score: self.score_col.clone(),
            label: self.label_col.clone(),
            group: self.group_col.clone(),
            id: self.id_col.clone(),
            delimiter: self.delimiter,
        }
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Xauc,
    Prf,
    Urf,
}

impl From<MetricArg> for DisparityMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Xauc => DisparityMetric::Xauc,
            MetricArg::Prf => DisparityMetric::Prf,
            MetricArg::Urf => DisparityMetric::Urf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    Strict,
    Half,
}

impl From<TiesArg> for TiePolicy {
    fn from(t: TiesArg) -> Self {
        match t {
            TiesArg::Strict => TiePolicy::Strict,
            TiesArg::Half => TiePolicy::Half,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Absolute,
    Signed,
}

/// Metric and mode flags shared by every fitting command.
#[derive(Debug, Clone, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value = "xauc")]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value = "absolute")]
    pub mode: ModeArg,
    /// Group whose term is penalised for exceeding the other's (signed mode).
    #[arg(long)]
    pub favored: Option<String>,
    #[arg(long)]
    pub disfavored: Option<String>,
}

impl ObjectiveArgs {
    pub fn config(&self, lambda: f64) -> Result<ObjectiveConfig, CliError> {
        let metric = self.metric.into();
        let config = match self.mode {
            ModeArg::Absolute => {
                if self.favored.is_some() || self.disfavored.is_some() {
                    return Err(CliError::Usage("--favored/--disfavored need --mode signed".into()));
                }
                ObjectiveConfig::new(lambda, metric)?
            }
            ModeArg::Signed => match (&self.favored, &self.disfavored) {
                (Some(f), Some(d)) => ObjectiveConfig::signed(lambda, metric, f.clone(), d.clone())?,
                _ => return Err(CliError::Usage("--mode signed needs --favored and --disfavored".into())),
            },
        };
        Ok(config)
    }

    pub fn mode(&self) -> Mode {
        match (&self.mode, &self.favored, &self.disfavored) {
            (ModeArg::Signed, Some(f), Some(d)) => Mode::Signed {
                favored: f.clone(),
                disfavored: d.clone(),
            },
            _ => Mode::Absolute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Iterative,
    Exact3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MergeArg {
    BySizeDesc,
    AsGiven,
}

impl From<MergeArg> for MergePolicy {
    fn from(m: MergeArg) -> Self {
        match m {
            MergeArg::BySizeDesc => MergePolicy::BySizeDesc,
            MergeArg::AsGiven => MergePolicy::AsGiven,
        }
    }
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
pub(crate) fn emit(path: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

pub(crate) fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Metrics(a) => cmd::metrics::run(&a, stdout),
        Command::Adjust(a) => cmd::adjust::run(&a, stdout),
        Command::Apply(a) => cmd::apply::run(&a, stdout),
        Command::Sweep(a) => cmd::sweep::run(&a, stdout),
        Command::Oracle(a) => cmd::oracle::run(&a, stdout),
        Command::Xroc(a) => cmd::xroc::run(&a, stdout),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn path_arg(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref()
}
