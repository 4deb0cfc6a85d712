//! Configuration-driven experiments: presets, engine runs, comparison and
//! CSV output.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{Engine, ExperimentConfig, PhaseScanConfig, ToleranceTier};
pub use presets::{preset, preset_names, Preset};
pub use runner::{exit_code, run_engine, run_experiment, Comparison, EngineOutput, ExperimentReport};
