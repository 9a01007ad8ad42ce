//! Experiment harness: configuration, metric records, run orchestration,
//! grid search and the verification suite.

pub mod checks;
pub mod config;
pub mod grid;
pub mod record;
pub mod runner;

pub use checks::{check_suite, finite_diff_grad, CheckReport, CheckResult};
pub use config::{AlgorithmConfig, ExperimentConfig, ProblemConfig, RunConfig, SourceConfig};
pub use grid::grid_search_k;
pub use record::{csv_string, parse_csv, read_csv, write_csv, MetricRow, RunRecord};
pub use runner::{
    compare, compare_csv, prepare, run_experiment, write_compare_csv, PreparedExperiment,
};
