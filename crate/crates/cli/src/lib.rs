//! Command-line front end for the transient sphere solver.

pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::SimulationConfig;
pub use error::{CliError, CliResult};
