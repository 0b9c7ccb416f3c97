//! Experiment harness: configuration, seeded parallel trials, estimator
//! comparison and the named bound-verification suites.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod stats;
pub mod suites;

pub use compare::{compare_estimators, MseRow};
pub use config::{AlgorithmSpec, CapsConfig, ExperimentConfig, InstanceSpec, Truth};
pub use error::HarnessError;
pub use experiment::{run_experiment, run_experiment_with, Execution, ExperimentReport, Summary, TrialRecord};
pub use suites::{verify_bounds, CheckResult, SuiteReport, SUITES};
