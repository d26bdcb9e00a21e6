//! Simulation of a RIS-assisted mmWave link probed with a four-sector beam
//! codebook, and regression of a user's angle from the per-sector received
//! powers.
//!
//! The pipeline runs `physics` → `probing` → `dataset` → `regressors` →
//! `evaluation`; `cli` wires it into the `risloc` binary.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fsutil;
pub mod physics;
pub mod probing;
pub mod regressors;
pub mod seed;

pub use error::{Error, Result};
