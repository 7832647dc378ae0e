//! Scenario configuration, experiment execution and result files.

pub mod config;
pub mod experiment;
pub mod results;

pub use config::{Preset, ScenarioConfig, Seeds};
pub use experiment::{
    apply_location_error, noise_power, run_experiment, run_experiment_with_bim, run_trials,
    ExperimentResult, RateSummary, Scenario, Scheme, TrialRecord,
};
pub use results::{format_report, read_rates, write_results};
