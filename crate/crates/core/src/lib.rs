//! Fair bipartite ranking by post-processing: disparity metrics over
//! cross-group pairs and dynamic programs that re-interleave per-group
//! rankings under a utility/fairness trade-off.

pub mod dp;
pub mod error;
pub mod exact;
pub mod metrics;
pub mod multigroup;
pub mod objective;
pub mod oracle;
pub mod ranking;
pub mod sampling;
pub mod synthetic;
pub mod transfer;

pub use dp::{fit_two_group, fit_two_group_with, CompletionRule, FitOptions, FitResult, Lattice, PathState, Step};
pub use error::{Error, Result};
pub use exact::{Frac, Lambda, Score};
pub use metrics::{DisparityMetric, MetricValue, RankedList};
pub use objective::{Mode, ObjectiveConfig};
pub use ranking::{CrossGroupOrdering, GroupedSequence, Label, OrderEntry, Provenance, Sample, TiePolicy};
