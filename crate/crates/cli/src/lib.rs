//! Command-line driver for the `janus-core` solvers: scenario files in,
//! `verify.json`, `trajectory.csv` and `steady.json` out.

pub mod error;
pub mod output;
pub mod pipeline;
pub mod scenario;

pub use error::CliError;
pub use pipeline::{run, RunOptions, Stage, Summary};
pub use scenario::{Scenario, ValidationOptions};
