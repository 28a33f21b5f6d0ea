//! Timing harness for the vecdyn dynamics routines.

pub mod cli;
pub mod report;
pub mod stats;
pub mod suites;

pub use cli::{run, Args, BenchError};
pub use report::{BenchReport, Record, SCHEMA_VERSION};
