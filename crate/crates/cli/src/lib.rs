//! Harness around `nlact-core`: precision sweeps, cost benchmarks, the
//! three-process TCP mode and a recurrent-cell microbenchmark, all emitting
//! JSON or CSV reports.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod expected;
pub mod party;
pub mod report;
pub mod rnn_cell;
pub mod sweep;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use report::Report;
