//! The `gaplab` command-line laboratory: configuration, experiment runners,
//! CSV tables and plot scripts.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod table;

pub use error::{CliError, CliResult};
