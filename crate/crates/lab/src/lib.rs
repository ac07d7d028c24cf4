//! Experiment orchestration, reports and the command-line front end for
//! `symrmt`.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{parse_probe, ExperimentConfig, ExperimentKind, DEFAULT_THRESHOLDS};
pub use experiments::run_experiment;
pub use report::{emit, ExperimentReport, Format, Status};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] symrmt::Error),
}
