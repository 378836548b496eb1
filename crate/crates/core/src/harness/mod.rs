//! Experiment orchestration: configuration, seeding, repeated runs,
//! aggregation, file output and the command-line interface.

pub mod cli;
mod config;
mod experiment;
mod output;
mod sweep;

pub use config::{ExperimentConfig, InstanceSource};
pub use experiment::{
    derive_seed, instance_seed, mean_std, run_experiment, run_seed, summarize, AlgorithmSummary, ExperimentResult,
    RunFailure, RunRecord, SummaryStats,
};
pub use output::{
    write_final_csv, write_results, write_sidecar, write_summary_csv, write_traces_csv, FINAL_FILE, SIDECAR_FILE,
    SUMMARY_FILE, TRACES_FILE,
};
pub use sweep::{run_sweep, write_sweep_csv, SweepParam, SweepRow};
