//! Experiment harness for the `longmem-core` learners.
//!
//! An [`ExperimentConfig`] names a learner, an environment and a list of
//! seeds. [`run_experiment`] runs the seeds in parallel, each into its own
//! regret ledger, and aggregates them into a [`SummaryRecord`] that compares
//! the mean final regret with the matching regret bound.

pub mod config;
pub mod error;
pub mod run;
pub mod summary;

pub use config::{Algorithm, EnvKind, ExperimentConfig, Overrides};
pub use error::{HarnessError, Result};
pub use run::{
    build_environment, build_learner, run_experiment, run_seed, run_sweep, write_outputs, AnyLearner,
    ExperimentResult, SeedDiagnostics, SeedRun,
};
pub use summary::{
    bound_value, loglog_tail_slope, summarize, summarize_against, summarize_dir, BoundParams,
    SummaryRecord, Theorem,
};
