//! Files, reports and the command-line front end for `priorsens-core`.
//!
//! Posterior grids are read as `x,density` CSV, count series as a single
//! column or `date,count`. Sensitivity results are written as JSON with two
//! CSV plot tables: the polar trace with reference circles, and the
//! sensitivity against angle. Every output file is written atomically.

pub mod cli;
pub mod config;
pub mod error;
pub mod ingest;
pub mod io;
pub mod report;

pub use cli::{main_with, run, Cli, RunConfig, Streams, Task};
pub use error::{CliError, Result};
pub use ingest::{ingest_timeseries, Ingested};
