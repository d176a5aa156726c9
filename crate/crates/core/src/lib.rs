//! Multi-armed bandits under a linear constraint on the reward-event rate.
//!
//! Each arm `i` produces a Bernoulli reward event with unknown mean `mu_i`
//! and, when the event fires, a known deterministic reward `r_i`. A policy
//! must maximize the expected collected reward while keeping the long-run
//! fraction of rounds with a reward event above a threshold `eta`.
//!
//! The crate is split by concern:
//!
//! - [`lp`]: the per-round linear program, its dual certificate, KKT checks
//!   and the slack thresholds of suboptimal arms.
//! - [`policy`]: LinConTS (Thompson sampling + LP) and LinCon-KL-UCB, plus
//!   [`policy::run_policy`] for full simulations.
//! - [`env`]: bandit instances, reward-event simulation, CSV loading and the
//!   synthetic coupon-like / edX-like generators.
//! - [`metrics`]: regret, violation, collected reward and multi-run aggregation.
//! - [`theory`]: Bernoulli KL divergence and the explicit terms of the
//!   regret/violation upper bounds.
//!
//! Arms are 0-indexed throughout the API; rounds are 1-indexed (`t = 1..=T`).

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod theory;

pub use env::BanditInstance;
pub use error::{Error, Result};
pub use lp::{ArmParams, DualCertificate, LpSolution};
pub use metrics::{AggregateSeries, MetricSeries};
pub use policy::{PolicyKind, RunTrace};
pub use theory::BoundReport;
