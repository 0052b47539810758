//! Monte Carlo experiments comparing finite-`n` statistics with exact and
//! limiting laws.

pub mod config;
pub mod experiment;
pub mod gof;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiment::{run_avoidance_experiment, run_cdf_experiment, run_counts_experiment, run_experiment};
pub use report::{Comparison, ComparisonKind, ExperimentReport};
