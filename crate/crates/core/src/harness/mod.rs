//! Monte Carlo experiment harness.

pub mod config;
pub mod dispersion;
pub mod experiment;
pub mod stats;
pub mod summary;
pub mod sweep;
pub mod trial;

pub use config::{ConfigError, ExperimentConfig, Structure};
pub use dispersion::{dispersion, dispersion_table, DispersionRow};
pub use experiment::{run_experiment, run_experiment_serial, schedule, TrialSpec};
pub use summary::{summarize, ConditionKey, SummaryRow};
pub use sweep::{distance_sweep, SweepConfig, SweepRow};
pub use trial::{run_trial, run_trial_with_samples, Outcome, TrialRecord, TrialRun};
