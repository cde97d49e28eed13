//! Library surface of the hydra batch driver, re-exported so integration
//! tests can drive commands in-process.

pub mod commands;
pub mod manifest;

pub use commands::{cmd_compare, cmd_export_mps, cmd_run, cmd_sample, cmd_validate, CliError};
pub use manifest::{load_manifest, parse_manifest, RunManifest, SolverChoice};
