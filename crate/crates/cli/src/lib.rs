//! Command-line front end for `cqnc-core`.
//!
//! Every command produces an [`table::OutputTable`]: named numeric columns
//! plus a metadata block, written as CSV or JSON.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod plan;
pub mod setup;
pub mod table;

pub use commands::{run, Output};
pub use error::{exit, CliError};
pub use table::{Format, Metadata, OutputTable};
