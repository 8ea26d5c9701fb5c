//! Experiment harness for the `socnet` simulator: config loading, the preset library,
//! parallel replication with a deterministic reduction, oracle scoring and output files.

pub mod check;
pub mod config;
pub mod emit;
mod error;
pub mod preset;
pub mod runner;
pub mod svg;

pub use check::{Check, CheckOutcome, CheckSpec, Reading, Verdict};
pub use config::{load_config, load_preset, ConfigFormat, LoadedConfig};
pub use error::HarnessError;
pub use preset::{builtin, builtin_names, ExperimentPreset, GridPoint, Measures, OutputKind};
pub use runner::{run_experiment, RunOptions, RunOutcome, RunSummary};
