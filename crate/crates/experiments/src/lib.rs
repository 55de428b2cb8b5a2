//! Experiment harness for `rgcn-core`: TOML-configured scenarios producing
//! deterministic CSV result tables.

pub mod config;
pub mod scenarios;
pub mod table;

pub use config::{ExperimentConfig, Scenario};
pub use scenarios::run;
pub use table::{ResultRow, ResultTable};
