//! Reading and meter-metadata CSV parsing.
//!
//! Two formats are accepted, both UTF-8 with LF or CRLF line endings:
//!
//! ```text
//! meter_id,timestamp,value,process_ok,congruent
//! m1,2018-01-10,100.5,1,1
//!
//! meter_id,producer,meter_type,year,contract,defective
//! m1,ACME,dry-dial,2009,residential,1
//! ```
//!
//! Timestamps are ISO-8601 calendar dates. Values are cumulative counter
//! readings in cubic meters and must be non-negative.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const READINGS_HEADER: [&str; 5] = ["meter_id", "timestamp", "value", "process_ok", "congruent"];
pub const METERS_HEADER: [&str; 6] = ["meter_id", "producer", "meter_type", "year", "contract", "defective"];

pub const MIN_CONSTRUCTION_YEAR: i32 = 1900;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: column `{column}`: {message}")]
    Field {
        line: u64,
        column: &'static str,
        message: String,
    },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: u64, expected: usize, found: usize },
    #[error("bad header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("duplicate meter_id `{0}`")]
    DuplicateMeter(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One meter reading as it arrives from the utility export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawReading {
    pub meter_id: String,
    pub timestamp: NaiveDate,
    /// Cumulative counter value in cubic meters.
    pub value: f64,
    pub process_ok: bool,
    pub congruent: bool,
}

/// Per-meter metadata: the four categorical attributes plus the ground-truth
/// defect flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterRecord {
    pub meter_id: String,
    pub producer: String,
    pub meter_type: String,
    pub year_of_construction: i32,
    pub contract_type: String,
    pub defective: bool,
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

fn check_header(record: Option<csv::StringRecord>, expected: &[&str]) -> Result<(), IngestError> {
    let found: Vec<String> = record
        .map(|r| r.iter().map(|s| s.trim_start_matches('\u{feff}').to_string()).collect())
        .unwrap_or_default();
    if found.iter().map(String::as_str).eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(IngestError::Header {
            expected: expected.join(","),
            found: found.join(","),
        })
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_flag(raw: &str, line: u64, column: &'static str) -> Result<bool, IngestError> {
    match raw {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(IngestError::Field {
            line,
            column,
            message: format!("expected 0 or 1, found `{other}`"),
        }),
    }
}

fn parse_date(raw: &str, line: u64) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|e| IngestError::Field {
        line,
        column: "timestamp",
        message: format!("invalid date `{raw}`: {e}"),
    })
}

fn non_empty(raw: &str, line: u64, column: &'static str) -> Result<String, IngestError> {
    if raw.is_empty() {
        Err(IngestError::Field {
            line,
            column,
            message: "empty value".into(),
        })
    } else {
        Ok(raw.to_string())
    }
}

/// Parses a readings CSV. Rows are returned in file order.
pub fn parse_readings<R: Read>(source: R) -> Result<Vec<RawReading>, IngestError> {
    let mut rdr = reader(source);
    let mut records = rdr.records();
    check_header(records.next().transpose()?, &READINGS_HEADER)?;

    let mut out = Vec::new();
    for record in records {
        let record = record?;
        let line = line_of(&record);
        if record.len() != READINGS_HEADER.len() {
            return Err(IngestError::ColumnCount {
                line,
                expected: READINGS_HEADER.len(),
                found: record.len(),
            });
        }
        let meter_id = non_empty(&record[0], line, "meter_id")?;
        let timestamp = parse_date(&record[1], line)?;
        let value: f64 = record[2].parse().map_err(|_| IngestError::Field {
            line,
            column: "value",
            message: format!("not a decimal: `{}`", &record[2]),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(IngestError::Field {
                line,
                column: "value",
                message: format!("value must be a finite non-negative decimal, found `{}`", &record[2]),
            });
        }
        out.push(RawReading {
            meter_id,
            timestamp,
            value,
            process_ok: parse_flag(&record[3], line, "process_ok")?,
            congruent: parse_flag(&record[4], line, "congruent")?,
        });
    }
    Ok(out)
}

/// Parses a meters CSV into a map keyed by meter id.
pub fn parse_meters<R: Read>(source: R) -> Result<BTreeMap<String, MeterRecord>, IngestError> {
    let current_year = Utc::now().year();
    let mut rdr = reader(source);
    let mut records = rdr.records();
    check_header(records.next().transpose()?, &METERS_HEADER)?;

    let mut out = BTreeMap::new();
    for record in records {
        let record = record?;
        let line = line_of(&record);
        if record.len() != METERS_HEADER.len() {
            return Err(IngestError::ColumnCount {
                line,
                expected: METERS_HEADER.len(),
                found: record.len(),
            });
        }
        let year: i32 = record[3].parse().map_err(|_| IngestError::Field {
            line,
            column: "year",
            message: format!("not an integer year: `{}`", &record[3]),
        })?;
        if !(MIN_CONSTRUCTION_YEAR..=current_year).contains(&year) {
            return Err(IngestError::Field {
                line,
                column: "year",
                message: format!("year {year} outside [{MIN_CONSTRUCTION_YEAR}, {current_year}]"),
            });
        }
        let meter = MeterRecord {
            meter_id: non_empty(&record[0], line, "meter_id")?,
            producer: non_empty(&record[1], line, "producer")?,
            meter_type: non_empty(&record[2], line, "meter_type")?,
            year_of_construction: year,
            contract_type: non_empty(&record[4], line, "contract")?,
            defective: parse_flag(&record[5], line, "defective")?,
        };
        if out.contains_key(&meter.meter_id) {
            return Err(IngestError::DuplicateMeter(meter.meter_id));
        }
        out.insert(meter.meter_id.clone(), meter);
    }
    Ok(out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes readings in the format accepted by [`parse_readings`].
///
/// Values use the shortest decimal representation that parses back to the
/// same number.
pub fn write_readings<W: Write>(sink: W, readings: &[RawReading]) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(READINGS_HEADER)?;
    for r in readings {
        w.write_record([
            r.meter_id.as_str(),
            &r.timestamp.format("%Y-%m-%d").to_string(),
            &r.value.to_string(),
            flag(r.process_ok),
            flag(r.congruent),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes meter records (in the iteration order given) in the format
/// accepted by [`parse_meters`].
pub fn write_meters<'a, W, I>(sink: W, meters: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a MeterRecord>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(METERS_HEADER)?;
    for m in meters {
        w.write_record([
            m.meter_id.as_str(),
            &m.producer,
            &m.meter_type,
            &m.year_of_construction.to_string(),
            &m.contract_type,
            flag(m.defective),
        ])?;
    }
    w.flush()?;
    Ok(())
}
