//! Experiment runner for the echoes laboratory: JSON configs, parallel
//! multi-seed training, sweeps and CSV/JSON artifacts.

pub mod config;
mod error;
pub mod records;
pub mod run;

pub use config::{DatasetSource, ExperimentConfig, RunSpec, SweepParam, SweepSpec};
pub use error::{HarnessError, Result};
pub use records::{summarize, MetricRecord, Stat, SummaryRow};
pub use run::{
    evaluate_saved, execute_run, generate_dataset, load_datasets, run_experiment, run_sweep,
    write_evaluation, Datasets, Evaluation, ExperimentReport, Manifest, RunOutcome, RunRequest,
    SweepReport,
};
