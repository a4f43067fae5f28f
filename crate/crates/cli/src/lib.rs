//! Command implementations behind the `semmap` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

pub use commands::{cmd_run, dispatch};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
