//! Experiment harness for `roadfront`: TOML configurations, parameter
//! sweeps, threshold bisection and the artifact directory they write.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bisect;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use bisect::{bisect_threshold, Bracket, Probe, Tolerance};
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, run_with, Check, Report, RunSettings};
