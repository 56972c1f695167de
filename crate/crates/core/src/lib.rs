//! Initial beam association in random mmWave cellular networks.
//!
//! Monte Carlo simulation of beam training under pilot contamination, plus
//! analytic coverage bounds for the same stochastic-geometry model.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod antenna;
pub mod beam_training;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod rng;
pub mod sim_engine;

pub use config::{load_scenario, ScenarioConfig};
pub use error::{Error, Result};
