//! Experiment harness: specs, presets, Monte Carlo runs, output files and
//! the self-check suite.

pub mod emit;
pub mod presets;
pub mod run;
pub mod spec;
pub mod validate;

pub use emit::{emit, parse_csv, render, CSV_COLUMNS};
pub use presets::{figure_preset, PRESETS};
pub use run::{run_experiment, run_experiment_with, GainStats, GainTable, RunOptions};
pub use spec::{ExperimentSpec, ModelSelection, OutputFormat, Scenario, Trials};
pub use validate::{validate, validate_with, CheckResult, ValidationReport};
