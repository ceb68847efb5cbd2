//! Command-line driver for gidseg: config handling, segmentation runs,
//! synthetic scenes and the benchmark grid.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{emit, parse, RunConfig};
pub use error::{CliError, Result};
