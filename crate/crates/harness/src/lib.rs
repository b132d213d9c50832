//! Experiment runner around `meanfield-core`: configuration, ε-sweeps,
//! validation suites and rate fits.

pub mod config;
pub mod error;
pub mod rate;
pub mod suites;
pub mod sweep;

pub use error::{HarnessError, Result};
