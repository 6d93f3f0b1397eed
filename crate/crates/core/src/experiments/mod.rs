//! Scenario configs, end-to-end runs and their reports.

pub mod config;
mod output;
pub mod report;
mod scenarios;

pub use config::{FieldSpec, ScenarioConfig, SCENARIOS};
pub use output::emit_outputs;
pub use report::{Check, Expectation, ExperimentReport, Verdict};
pub use scenarios::run_scenario;
