//! Plateau detection and construction of labeled windows.
//!
//! A plateau is a run of two or more consecutive readings with exactly the
//! same cumulative value. Positive windows come from defective meters and
//! end with the opening readings of the first plateau, preceded by `k`
//! readings. Negative windows are the most recent `k + p` readings of a
//! non-defective meter.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::MeterRecord;
use crate::validate::{Point, ValidSeries};

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error("invalid scheme `{0}`: expected <p>p+<k> with p in {{1,2}} and k >= 1, e.g. 1p+2")]
    Scheme(String),
    #[error("untrainable dataset for {scheme}: {positives} positives, {negatives} negatives")]
    Untrainable {
        scheme: Scheme,
        positives: usize,
        negatives: usize,
    },
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateauSpan {
    pub start_index: usize,
    pub length: usize,
}

/// Returns the first maximal run of two or more exactly equal consecutive
/// values.
pub fn find_plateau_in(values: &[f64]) -> Option<PlateauSpan> {
    let start = values.windows(2).position(|w| w[0] == w[1])?;
    let length = values[start..].iter().take_while(|&&v| v == values[start]).count();
    Some(PlateauSpan {
        start_index: start,
        length,
    })
}

pub fn find_plateau(series: &ValidSeries) -> Option<PlateauSpan> {
    let values: Vec<f64> = series.values().collect();
    find_plateau_in(&values)
}

/// Window layout: `plateau` plateau readings (1 or 2) preceded by
/// `preceding` readings. Written `1P+2`, parsed case-insensitively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scheme {
    pub plateau: usize,
    pub preceding: usize,
}

impl Scheme {
    pub fn new(plateau: usize, preceding: usize) -> Result<Self, LabelError> {
        if !(1..=2).contains(&plateau) || preceding == 0 {
            return Err(LabelError::Scheme(format!("{plateau}p+{preceding}")));
        }
        Ok(Self { plateau, preceding })
    }

    pub fn window_len(&self) -> usize {
        self.plateau + self.preceding
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}P+{}", self.plateau, self.preceding)
    }
}

impl FromStr for Scheme {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LabelError::Scheme(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (p, k) = lower.split_once("p+").ok_or_else(bad)?;
        let p: usize = p.trim().parse().map_err(|_| bad())?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        Scheme::new(p, k).map_err(|_| bad())
    }
}

pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>, LabelError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub meter_id: String,
    pub window: Vec<Point>,
    pub label: bool,
}

impl Example {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().map(|p| p.value)
    }

    /// True when some step in the window goes backwards (rollover or
    /// replacement).
    pub fn has_decreasing_step(&self) -> bool {
        self.window.windows(2).any(|w| w[1].value < w[0].value)
    }
}

/// Positive window for one series: the `k` readings before the first
/// plateau followed by the first `p` plateau readings.
pub fn build_positive(series: &ValidSeries, p: usize, k: usize) -> Option<Example> {
    let span = find_plateau(series)?;
    if span.length < p || span.start_index < k {
        return None;
    }
    Some(Example {
        meter_id: series.meter_id.clone(),
        window: series.points[span.start_index - k..span.start_index + p].to_vec(),
        label: true,
    })
}

/// Negative window for one series: its most recent `len` readings.
pub fn build_negative(series: &ValidSeries, len: usize) -> Option<Example> {
    if len == 0 || series.len() < len {
        return None;
    }
    Some(Example {
        meter_id: series.meter_id.clone(),
        window: series.points[series.len() - len..].to_vec(),
        label: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositiveOutcome {
    NoPlateau,
    ShortHistory,
}

/// Positive for a meter with several segments: the first plateau of the
/// meter's history (earliest segment that has one) is the failure event.
pub fn positive_for_meter(segments: &[ValidSeries], scheme: Scheme) -> Result<Example, PositiveOutcome> {
    let first = segments
        .iter()
        .find(|s| find_plateau(s).is_some())
        .ok_or(PositiveOutcome::NoPlateau)?;
    build_positive(first, scheme.plateau, scheme.preceding).ok_or(PositiveOutcome::ShortHistory)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeOutcome {
    TooShort,
    ExcludedPlateau,
}

/// One negative per meter: the longest eligible segment, most recent on
/// ties, contributes its last `len` readings.
pub fn negative_for_meter(
    segments: &[ValidSeries],
    len: usize,
    exclude_plateau: bool,
) -> Result<Example, NegativeOutcome> {
    let long_enough: Vec<&ValidSeries> = segments.iter().filter(|s| s.len() >= len).collect();
    if long_enough.is_empty() {
        return Err(NegativeOutcome::TooShort);
    }
    let best = long_enough
        .into_iter()
        .filter(|s| !exclude_plateau || find_plateau(s).is_none())
        .enumerate()
        .max_by_key(|(i, s)| (s.len(), *i))
        .map(|(_, s)| s)
        .ok_or(NegativeOutcome::ExcludedPlateau)?;
    build_negative(best, len).ok_or(NegativeOutcome::TooShort)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub scheme: Scheme,
    pub exclude_plateau_negatives: bool,
}

impl LabelConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            exclude_plateau_negatives: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub scheme: Scheme,
    pub examples: Vec<Example>,
    /// Metadata for every meter that contributed an example.
    pub meters: BTreeMap<String, MeterRecord>,
}

impl Dataset {
    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label).count()
    }

    pub fn negatives(&self) -> usize {
        self.examples.len() - self.positives()
    }

    pub fn meter(&self, example: &Example) -> &MeterRecord {
        &self.meters[&example.meter_id]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountsReport {
    pub scheme: String,
    pub window_len: usize,
    pub defective_meters: usize,
    pub non_defective_meters: usize,
    pub positives: usize,
    pub negatives: usize,
    pub defective_without_plateau: usize,
    pub defective_short_history: usize,
    pub non_defective_too_short: usize,
    pub non_defective_excluded_plateau: usize,
    /// Series whose meter id has no metadata record.
    pub unknown_meters: usize,
    /// Emitted windows containing a backwards counter step.
    pub decreasing_windows: usize,
}

/// Builds positives and negatives for one scheme across a validated fleet.
pub fn build_dataset(
    series: &BTreeMap<String, Vec<ValidSeries>>,
    meters: &BTreeMap<String, MeterRecord>,
    config: LabelConfig,
) -> Result<(Dataset, CountsReport), LabelError> {
    let scheme = config.scheme;
    let mut report = CountsReport {
        scheme: scheme.to_string(),
        window_len: scheme.window_len(),
        ..Default::default()
    };
    let mut examples = Vec::new();
    let mut used = BTreeMap::new();

    for (id, segments) in series {
        let Some(meter) = meters.get(id) else {
            report.unknown_meters += 1;
            continue;
        };
        let example = if meter.defective {
            report.defective_meters += 1;
            match positive_for_meter(segments, scheme) {
                Ok(e) => Some(e),
                Err(PositiveOutcome::NoPlateau) => {
                    report.defective_without_plateau += 1;
                    None
                }
                Err(PositiveOutcome::ShortHistory) => {
                    report.defective_short_history += 1;
                    None
                }
            }
        } else {
            report.non_defective_meters += 1;
            match negative_for_meter(segments, scheme.window_len(), config.exclude_plateau_negatives) {
                Ok(e) => Some(e),
                Err(NegativeOutcome::TooShort) => {
                    report.non_defective_too_short += 1;
                    None
                }
                Err(NegativeOutcome::ExcludedPlateau) => {
                    report.non_defective_excluded_plateau += 1;
                    None
                }
            }
        };
        if let Some(e) = example {
            if e.label {
                report.positives += 1;
            } else {
                report.negatives += 1;
            }
            if e.has_decreasing_step() {
                report.decreasing_windows += 1;
            }
            used.insert(id.clone(), meter.clone());
            examples.push(e);
        }
    }

    if report.positives == 0 || report.negatives == 0 {
        return Err(LabelError::Untrainable {
            scheme,
            positives: report.positives,
            negatives: report.negatives,
        });
    }
    Ok((
        Dataset {
            scheme,
            examples,
            meters: used,
        },
        report,
    ))
}

/// Writes windows in long format: one row per window position.
pub fn write_windows<W: Write>(sink: W, dataset: &Dataset) -> Result<(), LabelError> {
    let io = |e: csv::Error| LabelError::Io(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["meter_id", "label", "position", "timestamp", "value"]).map_err(io)?;
    for e in &dataset.examples {
        for (i, p) in e.window.iter().enumerate() {
            w.write_record([
                e.meter_id.as_str(),
                if e.label { "1" } else { "0" },
                &i.to_string(),
                &p.timestamp.format("%Y-%m-%d").to_string(),
                &p.value.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| LabelError::Io(e.to_string()))
}
