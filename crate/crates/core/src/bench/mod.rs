//! Experiment orchestration: configs, seeded runs, persisted artifacts and reports.

pub mod artifacts;
pub mod config;
pub mod experiment;
pub mod report;

pub use artifacts::{postprocess_run, PostResult, RunArtifacts, RunMeta};
pub use config::{Algorithm, BackendKind, DeltaRule, ExperimentConfig, SpeConfig, StateSpec, VqeConfig, OUTPUT_ENV};
pub use experiment::{experiment_dir, run_experiment, Context, ResultRow, RowStatus};
pub use report::{emit_report, loglog_slope, GroupSummary, Report};
