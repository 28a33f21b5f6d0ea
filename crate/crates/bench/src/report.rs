use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// Bumped whenever record columns change.
pub const SCHEMA_VERSION: u32 = 1;

/// One timed case. Column order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub case: String,
    pub robot: String,
    pub method: String,
    pub batch_size: usize,
    pub iterations: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p99_us: f64,
    /// State evaluations per second at the median time.
    pub throughput: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub suite: String,
    pub robot: String,
    pub n_dof: usize,
    pub seed: u64,
    pub workers: usize,
    pub timer_resolution_ns: u64,
    pub notes: Vec<String>,
    pub records: Vec<Record>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl BenchReport {
    /// CSV with `#` comment lines carrying the report header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# vecdyn-bench schema {}", self.schema_version)?;
        writeln!(
            out,
            "# suite={} robot={} n_dof={} seed={} workers={} timer_resolution_ns={}",
            self.suite, self.robot, self.n_dof, self.seed, self.workers, self.timer_resolution_ns
        )?;
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}

pub fn read_csv_records<R: Read>(input: R) -> csv::Result<Vec<Record>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .collect()
}
