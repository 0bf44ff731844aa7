//! Validity filtering and gap segmentation of per-meter reading histories.
//!
//! A reading is kept when it passed the upstream process checks and its
//! timestamp is congruent. The surviving readings of a meter are then cut
//! wherever two consecutive readings are more than `gap_limit_days` apart.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RawReading;

/// Seven months at 30.5 days each, rounded.
pub const DEFAULT_GAP_LIMIT_DAYS: i64 = 214;

#[derive(Debug, Error, PartialEq)]
pub enum ValidateError {
    #[error("readings mix meter ids `{0}` and `{1}`")]
    MixedMeters(String, String),
    #[error("readings for meter `{meter_id}` are not time-sorted at index {index}")]
    Unsorted { meter_id: String, index: usize },
    #[error("gap_limit_days must be positive, got {0}")]
    GapLimit(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub timestamp: NaiveDate,
    pub value: f64,
}

/// A gap-free run of valid readings from one meter.
///
/// Timestamps are strictly increasing and no consecutive gap exceeds the
/// limit the series was segmented with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidSeries {
    pub meter_id: String,
    pub points: Vec<Point>,
}

impl ValidSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.points.first().map(|p| p.timestamp)
    }
}

fn check_single_meter(readings: &[RawReading]) -> Result<(), ValidateError> {
    if let Some(first) = readings.first() {
        if let Some(other) = readings.iter().find(|r| r.meter_id != first.meter_id) {
            return Err(ValidateError::MixedMeters(first.meter_id.clone(), other.meter_id.clone()));
        }
    }
    Ok(())
}

/// Keeps the readings that passed process checks and are congruent.
pub fn filter_valid(readings: &[RawReading]) -> Result<Vec<RawReading>, ValidateError> {
    check_single_meter(readings)?;
    Ok(readings.iter().filter(|r| r.process_ok && r.congruent).cloned().collect())
}

/// Splits one meter's time-sorted readings into maximal runs whose adjacent
/// gaps are all at most `gap_limit_days`.
///
/// Readings sharing a date collapse to the last one.
pub fn segment(readings: &[RawReading], gap_limit_days: i64) -> Result<Vec<ValidSeries>, ValidateError> {
    if gap_limit_days <= 0 {
        return Err(ValidateError::GapLimit(gap_limit_days));
    }
    check_single_meter(readings)?;
    for (i, w) in readings.windows(2).enumerate() {
        if w[1].timestamp < w[0].timestamp {
            return Err(ValidateError::Unsorted {
                meter_id: w[0].meter_id.clone(),
                index: i + 1,
            });
        }
    }

    let mut points: Vec<Point> = Vec::with_capacity(readings.len());
    for r in readings {
        let p = Point {
            timestamp: r.timestamp,
            value: r.value,
        };
        match points.last_mut() {
            Some(last) if last.timestamp == r.timestamp => *last = p,
            _ => points.push(p),
        }
    }

    let Some(meter_id) = readings.first().map(|r| r.meter_id.clone()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    for p in points {
        if let Some(prev) = current.last() {
            if (p.timestamp - prev.timestamp).num_days() > gap_limit_days {
                out.push(ValidSeries {
                    meter_id: meter_id.clone(),
                    points: std::mem::take(&mut current),
                });
            }
        }
        current.push(p);
    }
    out.push(ValidSeries {
        meter_id,
        points: current,
    });
    Ok(out)
}

/// Per-rule accounting for a validation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub gap_limit_days: i64,
    pub meters_in: usize,
    pub readings_in: usize,
    pub dropped_process: usize,
    /// Passed process checks but were incongruent.
    pub dropped_incongruent: usize,
    pub duplicates_collapsed: usize,
    pub readings_kept: usize,
    pub meters_with_series: usize,
    pub segments: usize,
    pub gap_cuts: usize,
    /// Segment length → number of segments.
    pub segment_lengths: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone)]
pub struct FleetValidation {
    /// Segments per meter, in chronological order.
    pub series: BTreeMap<String, Vec<ValidSeries>>,
    pub summary: ValidationSummary,
}

/// Groups readings by meter, sorts each history by date (stable, so the
/// last reading of a day in file order wins), filters and segments.
pub fn validate_fleet(readings: &[RawReading], gap_limit_days: i64) -> Result<FleetValidation, ValidateError> {
    if gap_limit_days <= 0 {
        return Err(ValidateError::GapLimit(gap_limit_days));
    }
    let mut by_meter: BTreeMap<&str, Vec<RawReading>> = BTreeMap::new();
    for r in readings {
        by_meter.entry(r.meter_id.as_str()).or_default().push(r.clone());
    }

    struct MeterResult {
        id: String,
        dropped_process: usize,
        dropped_incongruent: usize,
        kept: usize,
        segments: Vec<ValidSeries>,
    }

    let results: Vec<MeterResult> = by_meter
        .into_par_iter()
        .map(|(id, mut history)| {
            history.sort_by_key(|r| r.timestamp);
            let dropped_process = history.iter().filter(|r| !r.process_ok).count();
            let dropped_incongruent = history.iter().filter(|r| r.process_ok && !r.congruent).count();
            let valid = filter_valid(&history)?;
            let kept = valid.len();
            let segments = segment(&valid, gap_limit_days)?;
            Ok(MeterResult {
                id: id.to_string(),
                dropped_process,
                dropped_incongruent,
                kept,
                segments,
            })
        })
        .collect::<Result<_, ValidateError>>()?;

    let mut summary = ValidationSummary {
        gap_limit_days,
        readings_in: readings.len(),
        meters_in: results.len(),
        ..Default::default()
    };
    let mut series = BTreeMap::new();
    for r in results {
        summary.dropped_process += r.dropped_process;
        summary.dropped_incongruent += r.dropped_incongruent;
        let in_segments: usize = r.segments.iter().map(ValidSeries::len).sum();
        summary.duplicates_collapsed += r.kept - in_segments;
        summary.readings_kept += in_segments;
        if r.segments.is_empty() {
            continue;
        }
        summary.meters_with_series += 1;
        summary.segments += r.segments.len();
        summary.gap_cuts += r.segments.len() - 1;
        for s in &r.segments {
            *summary.segment_lengths.entry(s.len()).or_default() += 1;
        }
        series.insert(r.id, r.segments);
    }
    Ok(FleetValidation { series, summary })
}
