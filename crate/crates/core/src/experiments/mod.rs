//! Config-driven experiment runner behind the `gvar` binary.

pub mod config;
pub mod report;
pub mod suites;
pub mod svg;

pub use config::{EngineSpec, ExperimentConfig, Input, InputSpec, OutputSpec, PartitionSpec, SpaceSpec, SuiteSpec};
pub use report::{Check, SuiteReport};
pub use suites::{run_integrate, run_norms, run_suite, with_threads, Artifacts, Outcome, Suite, SUITES};
