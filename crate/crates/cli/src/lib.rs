//! Command-line front end and benchmark harness for `logcoreset`.

pub mod commands;
pub mod harness;

pub use commands::{run, Cli};
pub use harness::{default_sizes, run_bench, BenchConfig, BenchReport};
