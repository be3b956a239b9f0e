use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;

/// Significant digits for decimal welfare values.
pub const DIGITS: usize = 12;

pub const PRICE_HEADER: [&str; 11] =
    ["format_version", "instance", "n", "m", "c", "p", "notion", "opt", "fair", "ratio_tag", "ratio_decimal"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

/// One command's output in every supported format.
pub struct Report {
    pub human: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Report {
    pub fn new(human: String, header: &[&str], rows: Vec<Vec<String>>, mut json: Value) -> Self {
        if let Value::Object(map) = &mut json {
            map.insert("format_version".into(), json!(FORMAT_VERSION));
        }
        Report { human, header: header.iter().map(|s| s.to_string()).collect(), rows, json }
    }

    pub fn write(&self, format: Format, out: impl Write) -> Result<()> {
        let mut out = out;
        match format {
            Format::Human => write!(out, "{}", self.human)?,
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&self.json)?)?,
            Format::Csv => write_csv(&self.header, &self.rows, out)?,
        }
        Ok(())
    }
}

pub fn write_csv(header: &[String], rows: &[Vec<String>], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if !header.is_empty() {
        writer.write_record(header)?;
    }
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}
