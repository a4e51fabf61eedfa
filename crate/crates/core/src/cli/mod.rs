//! Experiment runner behind the `pointgap` binary.

pub mod checks;
pub mod config;
pub mod presets;
pub mod run;

pub use config::{ExperimentConfig, Task, ValidatedConfig};
pub use run::{run, run_file, RunError, RunManifest, RunOptions};
