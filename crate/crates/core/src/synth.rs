//! Synthetic meter fleets with known ground truth.
//!
//! Every meter reads a cumulative counter at jittered intervals. Daily
//! consumption is log-normal per meter with per-interval noise. Defective
//! meters stop registering at a sampled onset index, so every later reading
//! repeats the onset value (the plateau). A configurable share of them
//! under-register during the last few intervals before the onset, which is
//! the precursor a sequence model can pick up. Non-defective meters are
//! strictly increasing apart from optional single-interval vacancies.
//!
//! In `informative` mode the producer attribute depends on the defect label
//! (risky producers for defective meters, except with the flip
//! probability). In `noise` mode all attributes are independent of it.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{write_meters, write_readings, IngestError, MeterRecord, RawReading};
use crate::seed;
use crate::validate::DEFAULT_GAP_LIMIT_DAYS;

pub const PRODUCERS: [&str; 4] = ["ACME", "BRIX", "CORA", "DELTA"];
/// Producers favoured by defective meters in informative mode.
pub const RISKY_PRODUCERS: [&str; 2] = ["ACME", "BRIX"];
pub const SOUND_PRODUCERS: [&str; 2] = ["CORA", "DELTA"];
pub const METER_TYPES: [&str; 3] = ["dry-dial", "multi-jet", "single-jet"];
pub const CONTRACTS: [&str; 3] = ["business", "residential", "seasonal"];
pub const YEARS: std::ops::RangeInclusive<i32> = 2000..=2014;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid fleet config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricalMode {
    Informative,
    Noise,
}

impl fmt::Display for CategoricalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CategoricalMode::Informative => "informative",
            CategoricalMode::Noise => "noise",
        })
    }
}

impl FromStr for CategoricalMode {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "informative" => Ok(CategoricalMode::Informative),
            "noise" => Ok(CategoricalMode::Noise),
            other => Err(SynthError::Config(format!("unknown categorical mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetConfig {
    pub meters: usize,
    pub defective_fraction: f64,
    pub readings_min: usize,
    pub readings_max: usize,
    pub interval_mean_days: f64,
    /// Intervals are uniform in `mean ± jitter`, rounded to whole days.
    pub interval_jitter_days: f64,
    /// Log-normal parameters of the per-meter daily consumption, m³/day.
    pub consumption_log_mean: f64,
    pub consumption_log_sd: f64,
    /// Log-normal sd of the per-interval multiplier on the daily rate.
    pub interval_noise_sd: f64,
    /// Smallest plateau start index; the largest is `readings - 2`.
    pub onset_min: usize,
    /// Share of defective meters that under-register before the onset.
    pub precursor_fraction: f64,
    pub precursor_intervals: usize,
    /// Registration factor of the last interval before the onset; earlier
    /// precursor intervals ramp linearly back toward 1.
    pub precursor_floor: f64,
    /// Share of non-defective meters with one zero-consumption interval.
    pub vacancy_fraction: f64,
    pub categorical_mode: CategoricalMode,
    pub producer_flip_prob: f64,
    pub gap_limit_days: i64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            meters: 1000,
            defective_fraction: 0.1,
            readings_min: 6,
            readings_max: 14,
            interval_mean_days: 60.0,
            interval_jitter_days: 20.0,
            consumption_log_mean: -0.9,
            consumption_log_sd: 0.5,
            interval_noise_sd: 0.25,
            onset_min: 1,
            precursor_fraction: 1.0,
            precursor_intervals: 2,
            precursor_floor: 0.2,
            vacancy_fraction: 0.05,
            categorical_mode: CategoricalMode::Noise,
            producer_flip_prob: 0.1,
            gap_limit_days: DEFAULT_GAP_LIMIT_DAYS,
            start_date: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            seed: 0,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SynthError::Config(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.meters == 0 {
            return bad("meters must be positive".into());
        }
        if !(self.defective_fraction > 0.0 && self.defective_fraction < 1.0) {
            return bad(format!("defective_fraction must be in (0, 1), got {}", self.defective_fraction));
        }
        if self.onset_min == 0 {
            return bad("onset_min must be at least 1".into());
        }
        if self.readings_min < self.onset_min + 2 || self.readings_max < self.readings_min {
            return bad(format!(
                "readings range [{}, {}] must start at onset_min + 2 = {} or later",
                self.readings_min,
                self.readings_max,
                self.onset_min + 2
            ));
        }
        if self.gap_limit_days <= 0 {
            return bad("gap_limit_days must be positive".into());
        }
        if !(self.interval_mean_days >= 1.0 && self.interval_mean_days < self.gap_limit_days as f64) {
            return bad(format!(
                "interval_mean_days must be in [1, gap_limit_days), got {}",
                self.interval_mean_days
            ));
        }
        if !(self.interval_jitter_days >= 0.0 && self.interval_jitter_days < self.interval_mean_days) {
            return bad("interval_jitter_days must be in [0, interval_mean_days)".into());
        }
        if !(self.consumption_log_sd >= 0.0 && self.interval_noise_sd >= 0.0 && self.consumption_log_mean.is_finite()) {
            return bad("consumption parameters must be finite with non-negative spreads".into());
        }
        if !(self.precursor_floor > 0.0 && self.precursor_floor <= 1.0) {
            return bad("precursor_floor must be in (0, 1]".into());
        }
        unit("precursor_fraction", self.precursor_fraction)?;
        unit("vacancy_fraction", self.vacancy_fraction)?;
        unit("producer_flip_prob", self.producer_flip_prob)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    /// Grouped by meter, time-ordered within each meter.
    pub readings: Vec<RawReading>,
    pub meters: Vec<MeterRecord>,
}

impl Fleet {
    pub fn to_csv(&self) -> Result<(Vec<u8>, Vec<u8>), SynthError> {
        let mut readings = Vec::new();
        write_readings(&mut readings, &self.readings)?;
        let mut meters = Vec::new();
        write_meters(&mut meters, &self.meters)?;
        Ok((readings, meters))
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir)?;
        let (r, m) = self.to_csv()?;
        std::fs::File::create(dir.join("readings.csv"))?.write_all(&r)?;
        std::fs::File::create(dir.join("meters.csv"))?.write_all(&m)?;
        Ok(())
    }
}

fn pick<'a, R: Rng>(rng: &mut R, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn lognormal(sd: f64) -> LogNormal<f64> {
    LogNormal::new(0.0, sd).expect("sd validated non-negative")
}

fn generate_meter(config: &FleetConfig, index: usize) -> (MeterRecord, Vec<RawReading>) {
    let mut rng = seed::rng(config.seed, &[seed::METER, index as u64]);
    let meter_id = format!("m{index:06}");
    let defective = rng.random_bool(config.defective_fraction);
    let n = rng.random_range(config.readings_min..=config.readings_max);

    let producer = match config.categorical_mode {
        CategoricalMode::Noise => pick(&mut rng, &PRODUCERS),
        CategoricalMode::Informative => {
            let flipped = rng.random_bool(config.producer_flip_prob);
            if defective != flipped {
                pick(&mut rng, &RISKY_PRODUCERS)
            } else {
                pick(&mut rng, &SOUND_PRODUCERS)
            }
        }
    };
    let meter = MeterRecord {
        meter_id: meter_id.clone(),
        producer: producer.to_string(),
        meter_type: pick(&mut rng, &METER_TYPES).to_string(),
        year_of_construction: rng.random_range(YEARS),
        contract_type: pick(&mut rng, &CONTRACTS).to_string(),
        defective,
    };

    // registration factor for the interval ending at each reading index
    let mut factor = vec![1.0; n];
    let mut frozen_from = n;
    if defective {
        let onset = rng.random_range(config.onset_min..=n - 2);
        frozen_from = onset + 1;
        if rng.random_bool(config.precursor_fraction) {
            let d = config.precursor_intervals;
            for m in 0..d.min(onset) {
                factor[onset - m] = config.precursor_floor + (1.0 - config.precursor_floor) * m as f64 / d as f64;
            }
        }
    } else if rng.random_bool(config.vacancy_fraction) {
        let at = rng.random_range(1..n);
        factor[at] = 0.0;
    }

    let daily = (config.consumption_log_mean + config.consumption_log_sd * sample_std_normal(&mut rng)).exp();
    let noise = lognormal(config.interval_noise_sd);
    let mut date = config.start_date + Days::new(rng.random_range(0..config.interval_mean_days as u64));
    let mut liters: u64 = rng.random_range(0..500_000);
    let mut readings = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let jitter = rng.random_range(-config.interval_jitter_days..=config.interval_jitter_days);
            let days = (config.interval_mean_days + jitter).round().max(1.0);
            let eps: f64 = noise.sample(&mut rng);
            date = date + Days::new(days as u64);
            if i < frozen_from && factor[i] > 0.0 {
                let delta = (daily * days * eps * factor[i] * 1000.0).round().max(1.0);
                liters += delta as u64;
            }
        }
        readings.push(RawReading {
            meter_id: meter_id.clone(),
            timestamp: date,
            value: liters as f64 / 1000.0,
            process_ok: true,
            congruent: true,
        });
    }
    (meter, readings)
}

fn sample_std_normal<R: Rng>(rng: &mut R) -> f64 {
    rand_distr::StandardNormal.sample(rng)
}

/// Generates a fleet. Each meter draws from its own stream derived from
/// `(seed, meter index)`, so output does not depend on generation order.
pub fn generate(config: &FleetConfig) -> Result<Fleet, SynthError> {
    config.validate()?;
    let (meters, readings): (Vec<_>, Vec<_>) = (0..config.meters).map(|i| generate_meter(config, i)).unzip();
    Ok(Fleet {
        readings: readings.into_iter().flatten().collect(),
        meters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    pub process_fail: f64,
    pub incongruent: f64,
    /// Probability that the gap before a reading is stretched past the limit.
    pub gap: f64,
    pub gap_limit_days: i64,
}

impl Default for NoiseRates {
    fn default() -> Self {
        Self {
            process_fail: 0.0,
            incongruent: 0.0,
            gap: 0.0,
            gap_limit_days: DEFAULT_GAP_LIMIT_DAYS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionLog {
    pub process_flags_cleared: usize,
    pub congruent_flags_cleared: usize,
    pub gaps_inserted: usize,
}

/// Corrupts readings at the given rates: clears `process_ok` and
/// `congruent` flags and pushes later readings of a meter forward by
/// `gap_limit_days + 1` days.
///
/// Three uniforms are drawn per reading whatever the rates, so raising a
/// rate only ever adds corruptions on top of those at the lower rate.
/// Readings must be grouped by meter and time-ordered within each meter.
pub fn inject_quality_noise(readings: &[RawReading], rates: NoiseRates, seed_value: u64) -> (Vec<RawReading>, InjectionLog) {
    let mut rng = seed::rng(seed_value, &[seed::NOISE]);
    let mut log = InjectionLog::default();
    let mut out = Vec::with_capacity(readings.len());
    let mut shift: u64 = 0;
    let stretch = rates.gap_limit_days.max(0) as u64 + 1;

    for (i, r) in readings.iter().enumerate() {
        let u_process: f64 = rng.random();
        let u_congruent: f64 = rng.random();
        let u_gap: f64 = rng.random();
        let continues = i > 0 && readings[i - 1].meter_id == r.meter_id;
        if !continues {
            shift = 0;
        } else if u_gap < rates.gap {
            shift += stretch;
            log.gaps_inserted += 1;
        }
        let mut r = r.clone();
        r.timestamp = r.timestamp + Days::new(shift);
        if u_process < rates.process_fail && r.process_ok {
            r.process_ok = false;
            log.process_flags_cleared += 1;
        }
        if u_congruent < rates.incongruent && r.congruent {
            r.congruent = false;
            log.congruent_flags_cleared += 1;
        }
        out.push(r);
    }
    (out, log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::find_plateau_in;
    use crate::validate::segment;

    fn small(seed_value: u64) -> FleetConfig {
        FleetConfig {
            meters: 10,
            defective_fraction: 0.5,
            seed: seed_value,
            ..Default::default()
        }
    }

    #[test]
    fn byte_identical_reruns() {
        let a = generate(&small(7)).unwrap().to_csv().unwrap();
        let b = generate(&small(7)).unwrap().to_csv().unwrap();
        assert_eq!(a, b);
        let c = generate(&small(8)).unwrap().to_csv().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn defective_series_have_late_plateau() {
        let fleet = generate(&FleetConfig {
            meters: 300,
            defective_fraction: 0.5,
            ..Default::default()
        })
        .unwrap();
        for m in fleet.meters.iter() {
            let values: Vec<f64> = fleet
                .readings
                .iter()
                .filter(|r| r.meter_id == m.meter_id)
                .map(|r| r.value)
                .collect();
            let span = find_plateau_in(&values);
            if m.defective {
                let span = span.expect("defective meter without plateau");
                assert!(span.start_index >= 1);
                assert_eq!(span.start_index + span.length, values.len());
            } else if let Some(span) = span {
                assert_eq!(span.length, 2, "vacancy runs are single intervals");
            }
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        for cfg in [
            FleetConfig {
                defective_fraction: 0.0,
                ..Default::default()
            },
            FleetConfig {
                defective_fraction: 1.0,
                ..Default::default()
            },
            FleetConfig {
                interval_mean_days: 300.0,
                ..Default::default()
            },
            FleetConfig {
                readings_min: 2,
                ..Default::default()
            },
            FleetConfig {
                producer_flip_prob: 1.5,
                ..Default::default()
            },
        ] {
            assert!(matches!(generate(&cfg), Err(SynthError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn zero_rates_are_identity() {
        let fleet = generate(&small(3)).unwrap();
        let (out, log) = inject_quality_noise(&fleet.readings, NoiseRates::default(), 9);
        assert_eq!(out, fleet.readings);
        assert_eq!(log, InjectionLog::default());
    }

    #[test]
    fn full_gap_rate_isolates_every_reading() {
        let fleet = generate(&FleetConfig {
            meters: 1,
            readings_min: 10,
            readings_max: 10,
            defective_fraction: 0.5,
            ..Default::default()
        })
        .unwrap();
        let rates = NoiseRates {
            gap: 1.0,
            ..Default::default()
        };
        let (out, log) = inject_quality_noise(&fleet.readings, rates, 1);
        assert_eq!(log.gaps_inserted, 9);
        let segs = segment(&out, DEFAULT_GAP_LIMIT_DAYS).unwrap();
        assert_eq!(segs.len(), 10);
        assert!(segs.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn injection_log_matches_recount() {
        let fleet = generate(&small(4)).unwrap();
        let rates = NoiseRates {
            process_fail: 0.2,
            incongruent: 0.3,
            gap: 0.1,
            ..Default::default()
        };
        let (out, log) = inject_quality_noise(&fleet.readings, rates, 2);
        assert_eq!(out.iter().filter(|r| !r.process_ok).count(), log.process_flags_cleared);
        assert_eq!(out.iter().filter(|r| !r.congruent).count(), log.congruent_flags_cleared);
    }
}
