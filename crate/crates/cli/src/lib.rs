//! Command-line orchestration: configuration parsing, pipeline dispatch and
//! CSV/JSON export.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{run, CliError, RunOutcome};
