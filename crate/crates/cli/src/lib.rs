//! Benchmark harness behind the `qsat` binary.

pub mod dataset;
pub mod harness;

use std::path::PathBuf;

use thiserror::Error;

pub use dataset::{DatasetSpec, Instance, Problem};
pub use harness::{
    check_weights, emit_report, group, run_benchmark, BenchSpec, Format, GroupRow, Report,
    RunRecord, RunStatus, CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {msg}")]
    Dataset { path: PathBuf, msg: String },
    #[error("invalid benchmark spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Strategy(String),
    #[error("weights: {0}")]
    Weights(String),
    #[error("generator: {0}")]
    Generator(String),
    #[error("solver: {0}")]
    Solver(#[from] qsat_core::SolveError),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("no records to report")]
    EmptyReport,
}
