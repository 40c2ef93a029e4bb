//! Report records, CSV tables and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ReportFormat};
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Recorded for the reader; never fails the run.
    Evidence,
}

/// How a check's value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Comparison {
    /// `value <= tolerance`.
    AtMost { tolerance: f64 },
    /// `|value - target| <= tolerance`.
    Within { target: f64, tolerance: f64 },
    Evidence,
}

/// One named measurement. The status is a function of `value` and
/// `comparison` alone; non-finite values fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "lossless_f64")]
    pub value: f64,
    pub comparison: Comparison,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Comparison {
    pub fn status(&self, value: f64) -> Status {
        let ok = match *self {
            Comparison::AtMost { tolerance } => value <= tolerance,
            Comparison::Within { target, tolerance } => (value - target).abs() <= tolerance,
            Comparison::Evidence => return Status::Evidence,
        };
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison) -> Self {
        Self {
            name: name.into(),
            value,
            comparison,
            status: comparison.status(value),
            note: None,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtMost { tolerance })
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::Within { target, tolerance })
    }

    pub fn evidence(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, Comparison::Evidence)
    }

    /// A yes/no observation as `1` or `0`; pass/fail against `expected`
    /// when given.
    pub fn flag(name: impl Into<String>, observed: bool, expected: Option<bool>) -> Self {
        let v = if observed { 1.0 } else { 0.0 };
        match expected {
            Some(e) => Self::within(name, v, if e { 1.0 } else { 0.0 }, 0.0),
            None => Self::evidence(name, v),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Status re-derived from the recorded value and comparison.
    pub fn recompute(&self) -> Status {
        self.comparison.status(self.value)
    }
}

/// Non-finite floats are written as the strings `"NaN"`, `"inf"`, `"-inf"`
/// since JSON has no literal for them.
mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            format!("{v:?}").serialize(s)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("not a number: {s}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact_version: String,
    pub subcommand: String,
    /// The exact configuration that produced this report.
    pub config: ExperimentConfig,
    /// Mantissa bits of the arithmetic the module actually ran in.
    pub precision_bits_used: u32,
    pub wall_clock_seconds: f64,
    pub checks: Vec<Check>,
    /// Data files written next to the report, relative to it.
    pub files: Vec<String>,
    /// Subcommand-specific summary.
    pub data: serde_json::Value,
}

impl Report {
    /// True iff no pass/fail check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// A CSV file held in memory until the run completes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            file_name: file_name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&self.header).expect("csv header");
        for r in &self.rows {
            w.write_record(r).expect("csv row");
        }
        w.into_inner().expect("csv flush")
    }
}

/// Writes `bytes` to a temporary file in the target directory, then renames
/// it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn report_bytes(report: &Report, format: ReportFormat) -> Vec<u8> {
    let mut out = match format {
        ReportFormat::Pretty => serde_json::to_vec_pretty(report),
        ReportFormat::Compact => serde_json::to_vec(report),
    }
    .expect("report serializes");
    out.push(b'\n');
    out
}

/// Writes the tables and then `report.json` into `dir`; returns the report
/// path.
pub fn write_outputs(dir: &Path, report: &Report, tables: &[Table], format: ReportFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for t in tables {
        write_atomic(&dir.join(&t.file_name), &t.to_bytes())?;
    }
    let path = dir.join("report.json");
    write_atomic(&path, &report_bytes(report, format))?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
