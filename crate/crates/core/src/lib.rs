//! Core of the plannerbench suite: 2D planning problems, sampling-based
//! planners, path post-processing, the benchmark runner, the plain-text
//! benchmark log format and the statistics behind the results dashboard.

pub mod benchlog;
pub mod geometry;
pub mod par;
pub mod paths;
pub mod planners;
pub mod props;
pub mod runner;
pub mod stats;

/// Version string recorded in experiment logs.
pub const SUITE_VERSION: &str = env!("CARGO_PKG_VERSION");
