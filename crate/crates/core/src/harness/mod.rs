//! Experiment configuration, Monte Carlo sweeps and result files.

pub mod config;
pub mod emit;
pub mod instance;
pub mod sweep;

pub use config::{parse_config, Algorithm, ArchitectureMode, ExperimentPlan, SweepAxis};
pub use emit::{emit_results, OutputFormat};
pub use instance::{Fixture, Instance};
pub use sweep::{calibrate_conventional, run_sweep, run_sweep_with_threads, DropRecord, SweepResult, SweepRow};
