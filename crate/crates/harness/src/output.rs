//! CSV and JSON result files.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{io_err, Result};
use crate::runner::RunResult;

pub const CSV_COLUMNS: [&str; 14] = [
    "voltage_v",
    "layout",
    "chips",
    "acc_mean",
    "acc_std",
    "acc_min",
    "read_pw",
    "write_pw",
    "leak_pw",
    "total_pw",
    "savings_total_pct",
    "area_units",
    "area_overhead_pct",
    "seed",
];

pub fn csv_record(r: &RunResult) -> Vec<String> {
    vec![
        r.voltage.to_string(),
        r.layout.clone(),
        r.chips.to_string(),
        r.accuracy.mean.to_string(),
        r.accuracy.std.to_string(),
        r.accuracy.min.to_string(),
        r.power.read_power.to_string(),
        r.power.write_power.to_string(),
        r.power.leakage_power.to_string(),
        r.power.total.to_string(),
        r.savings.total_pct.to_string(),
        r.power.area_units.to_string(),
        (100.0 * r.power.area_overhead).to_string(),
        r.seed.to_string(),
    ]
}

/// Marks a point that failed; numeric columns stay empty.
pub fn error_record(voltage: f64, layout: &str, message: &str) -> Vec<String> {
    let mut rec = vec![String::new(); CSV_COLUMNS.len()];
    rec[0] = voltage.to_string();
    rec[1] = layout.to_string();
    rec[2] = "0".into();
    rec[3] = format!("error: {message}");
    rec
}

/// Row-at-a-time CSV writer that flushes after every row.
pub struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: &Path, extra_columns: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut writer = csv::Writer::from_path(path)?;
        let header: Vec<&str> = CSV_COLUMNS.iter().chain(extra_columns).copied().collect();
        writer.write_record(&header)?;
        writer.flush().map_err(io_err(path))?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, record: &[String]) -> Result<()> {
        self.writer.write_record(record)?;
        self.writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(io_err(path))
}
