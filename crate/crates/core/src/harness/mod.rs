//! Experiment configuration, CSV I/O, metrics and the property suites used
//! by the `fracdiff` command-line tool.

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod metrics;
pub mod validate;

pub use config::{ExperimentConfig, RunConfig};
pub use experiment::{reference_curve, run_experiment, ExperimentReport, Reference, RunReport};
pub use metrics::{lag_and_rmse, RunMetrics};
pub use validate::{run_suite, CheckResult, Suite};
