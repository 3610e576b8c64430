//! Experiment-runner library behind the `mgtlab` binary: configuration
//! loading, deterministic artifact emission, and the experiment drivers
//! including the acceptance suite.

pub mod config;
pub mod experiments;
pub mod report;
