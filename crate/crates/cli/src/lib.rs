//! Config-driven front end for `nonholo-core`: the `nonholo` binary's
//! `simulate`, `sweep`, `verify` and `systems` commands.

pub mod config;
pub mod error;
pub mod output;
pub mod simulate;
pub mod sweep;
pub mod verify;

pub use config::{prepare, RunConfig};
pub use error::CliError;
