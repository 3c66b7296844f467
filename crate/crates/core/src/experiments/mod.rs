//! Config-driven sweeps over rule families, and rate fitting.

mod config;
mod ratefit;
mod run;

pub use config::{ExperimentConfig, OutputPaths, QuasiSettings, RuleFamily};
pub use ratefit::{rate_fit, RateFitReport, RateModel};
pub use run::{run_experiment, write_outputs, Assertion, ExperimentReport, ExperimentRow, CSV_SCHEMA};
