//! The experiment sweep: configuration, per-run pipeline, aggregation and
//! report files.

mod config;
mod report;
mod run;

pub use config::{DatasetConfig, ExperimentConfig, SynthesizerConfig, DEFAULT_EPSILON_GRID};
pub use report::{
    emit_report, importance_profiles, read_runs_json, runs_csv, summarize, Format, Manifest, ManifestEntry,
    ProfileRow, Summary, RUNS_COLUMNS,
};
pub use run::{run_experiment, run_experiment_with_jobs, Experiment, RunResult};
