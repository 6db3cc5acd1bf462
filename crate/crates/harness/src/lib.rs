//! Experiment runner for the HE-ES optimizer: seeded batches of runs, CSV
//! traces with a JSON summary, per-generation medians and ECDF data.

pub mod config;
pub mod ecdf;
mod error;
pub mod experiment;
pub mod median;
pub mod trace;

pub use config::ExperimentConfig;
pub use ecdf::{budget_grid, compute_ecdf, EcdfCurve};
pub use error::{HarnessError, Result};
pub use experiment::{prepare_run, run_experiment, run_experiment_to, ExperimentOutput};
pub use hees::condition_number;
pub use median::{median, median_trajectory, TraceField};
pub use trace::{
    evals_to_targets, read_experiment, read_summary, read_trace_file, write_trace_file, ExperimentSummary,
    RunSummary, TraceRow,
};
