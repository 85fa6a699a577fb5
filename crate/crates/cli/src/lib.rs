//! Command-line front-end for `conductance-spectrum`: environment files,
//! spectrum reports, convergence sweeps and trajectory comparisons.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or unreadable input, 4 solver.

pub mod args;
pub mod commands;
pub mod config;
pub mod dist;
pub mod error;
pub mod plot;
pub mod report;
pub mod table;

pub use error::{CliError, Result};
