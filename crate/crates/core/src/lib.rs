//! Normalized error-feedback distributed optimization, simulated at desk
//! scale.
//!
//! The crate provides contractive compressors with payload accounting, two
//! nonconvex testbed objectives (a quartic polynomial and logistic regression
//! with a saturating regularizer), the theoretical stepsize and momentum
//! rules for error-feedback methods under generalized smoothness, the
//! client/server round simulation itself, and a harness for configured
//! experiments, horizon grid search, CSV emission and invariant checks.

pub mod algorithms;
pub mod compressors;
pub mod error;
pub mod harness;
pub mod problems;
pub mod rng;
pub mod schedules;
pub mod vector;

pub use algorithms::{AlgoConfig, ClientState, InitMode, ServerState, Variant};
pub use compressors::{alpha_of, compress, payload_bits, CompressorKind};
pub use error::{Error, Result};
pub use harness::{
    check_suite, compare, grid_search_k, run_experiment, CheckReport, ExperimentConfig, MetricRow,
    RunRecord,
};
pub use problems::{Problem, SmoothnessConstants};
pub use rng::{sample_gaussian, seeded_rng, RngStream};
pub use schedules::{ResolvedSteps, RuleKind, StepsizeRule, TheoryConstants};
pub use vector::{norm2, DenseVector};
