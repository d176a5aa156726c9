//! Experiment driver for constrained Bernoulli bandits: multi-run
//! simulations, bound reports and synthetic instance generation.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{Algo, ExperimentConfig, InstanceSource, Settings};
pub use error::CliError;
