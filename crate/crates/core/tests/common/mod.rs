//! Independent reference implementations shared by the integration tests.
//! They are deliberately naive: quadratic loops, maps instead of sorts,
//! no reuse of the library's helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use meterdown::features::STEP_FEATURES;
use meterdown::ingest::{MeterRecord, RawReading};
use meterdown::label::Scheme;
use meterdown::models::{Dims, EncodedExample, Model};
use meterdown::neuralcore::{Parameters, Tensor2};
use rand::Rng;

/// Fraction of positive/negative pairs ranked correctly, ties one half.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

pub type Run = Vec<(NaiveDate, f64)>;

/// One meter's readings in any order → valid segments. Flags first, then
/// the last reading of each date in input order, then a single scan that
/// opens a new run whenever the gap exceeds the limit.
pub fn cut_scan(readings: &[RawReading], limit_days: i64) -> Vec<Run> {
    let mut by_date: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for r in readings.iter().filter(|r| r.process_ok && r.congruent) {
        by_date.insert(r.timestamp, r.value);
    }
    let mut runs: Vec<Run> = Vec::new();
    let mut prev: Option<NaiveDate> = None;
    for (d, v) in by_date {
        match prev {
            Some(p) if (d - p).num_days() <= limit_days => runs.last_mut().unwrap().push((d, v)),
            _ => runs.push(vec![(d, v)]),
        }
        prev = Some(d);
    }
    runs
}

pub fn group_by_meter(readings: &[RawReading]) -> BTreeMap<String, Vec<RawReading>> {
    let mut out: BTreeMap<String, Vec<RawReading>> = BTreeMap::new();
    for r in readings {
        out.entry(r.meter_id.clone()).or_default().push(r.clone());
    }
    out
}

#[derive(Debug, Default, PartialEq)]
pub struct Enumerated {
    pub positives: usize,
    pub negatives: usize,
    /// meter id → (label, window)
    pub windows: BTreeMap<String, (bool, Run)>,
}

/// Brute-force labeling: scan every position of every segment for the first
/// pair of equal consecutive readings; for healthy meters take the tail of
/// the longest segment, the later one on ties.
pub fn enumerate_labels(
    readings: &[RawReading],
    meters: &BTreeMap<String, MeterRecord>,
    scheme: Scheme,
    limit_days: i64,
    exclude_plateau_negatives: bool,
) -> Enumerated {
    let has_plateau = |run: &Run| (1..run.len()).any(|i| run[i].1 == run[i - 1].1);
    let len = scheme.plateau + scheme.preceding;
    let mut out = Enumerated::default();
    for (id, history) in group_by_meter(readings) {
        let Some(meter) = meters.get(&id) else { continue };
        let runs = cut_scan(&history, limit_days);
        let window = if meter.defective {
            let mut hit = None;
            'outer: for run in &runs {
                for i in 0..run.len().saturating_sub(1) {
                    if run[i].1 == run[i + 1].1 {
                        hit = Some((run, i));
                        break 'outer;
                    }
                }
            }
            match hit {
                Some((run, i)) if i >= scheme.preceding => Some(run[i - scheme.preceding..i + scheme.plateau].to_vec()),
                _ => None,
            }
        } else {
            let mut best: Option<&Run> = None;
            for run in &runs {
                if run.len() < len || (exclude_plateau_negatives && has_plateau(run)) {
                    continue;
                }
                if best.is_none_or(|b| run.len() >= b.len()) {
                    best = Some(run);
                }
            }
            best.map(|run| run[run.len() - len..].to_vec())
        };
        if let Some(w) = window {
            if meter.defective {
                out.positives += 1;
            } else {
                out.negatives += 1;
            }
            out.windows.insert(id, (meter.defective, w));
        }
    }
    out
}

pub fn day(n: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() + Days::new(n)
}

/// A messy random history: irregular intervals with occasional long gaps,
/// repeated dates, cleared flags, zero and negative increments.
pub fn random_history<R: Rng>(rng: &mut R, meter_id: &str, max_len: usize) -> Vec<RawReading> {
    let n = rng.random_range(0..=max_len);
    let mut t = rng.random_range(0..30u64);
    let mut v = rng.random_range(0..500) as f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(RawReading {
            meter_id: meter_id.to_string(),
            timestamp: day(t),
            value: v,
            process_ok: rng.random_bool(0.9),
            congruent: rng.random_bool(0.9),
        });
        t += match rng.random_range(0..20) {
            0 => 0,
            1 => rng.random_range(200..260),
            2 => 214,
            3 => 215,
            _ => rng.random_range(1..120),
        };
        v += match rng.random_range(0..10) {
            0..=2 => 0.0,
            3 => -(rng.random_range(1..20) as f64),
            _ => rng.random_range(1..60) as f64,
        };
    }
    out
}

pub fn meter(id: &str, defective: bool) -> MeterRecord {
    MeterRecord {
        meter_id: id.to_string(),
        producer: "ACME".into(),
        meter_type: "single-jet".into(),
        year_of_construction: 2010,
        contract_type: "residential".into(),
        defective,
    }
}

/// Random encoded input with `blocks` one-hot groups of equal width.
pub fn random_input<R: Rng>(rng: &mut R, dims: Dims, steps: usize, blocks: usize, label: bool) -> EncodedExample {
    let seq = (0..steps * STEP_FEATURES).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut categorical = vec![0.0; dims.categorical];
    if dims.categorical > 0 {
        let width = dims.categorical / blocks;
        for b in 0..blocks {
            categorical[b * width + rng.random_range(0..width)] = 1.0;
        }
    }
    EncodedExample {
        sequence: Tensor2::new(steps, STEP_FEATURES, seq).unwrap(),
        categorical,
        label,
    }
}

#[derive(Debug, Default)]
pub struct FdReport {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel: f64,
    pub worst: String,
}

/// Central differences over every parameter coordinate. A coordinate is
/// skipped when either perturbation flips the sign of some relu
/// pre-activation, since the loss is not differentiable across the flip.
pub fn finite_difference_check(model: &Model, input: &EncodedExample, h: f64) -> FdReport {
    let (_, grads) = model.loss_and_grad(input).unwrap();
    let (_, base_pre) = model.loss_and_relu_preactivations(input).unwrap();
    let grad_blocks: Vec<(String, Tensor2)> = grads.blocks().into_iter().map(|(n, t)| (n, t.clone())).collect();
    let same_side = |pre: &[f64]| pre.iter().zip(&base_pre).all(|(a, b)| (*a > 0.0) == (*b > 0.0));

    let mut probe = model.clone();
    let mut report = FdReport::default();
    for (b, (name, g)) in grad_blocks.iter().enumerate() {
        for i in 0..g.len() {
            let original = probe.blocks()[b].1.as_slice()[i];
            let eval = |probe: &mut Model, x: f64| {
                probe.blocks_mut()[b].1.as_mut_slice()[i] = x;
                probe.loss_and_relu_preactivations(input).unwrap()
            };
            let (lp, pp) = eval(&mut probe, original + h);
            let (lm, pm) = eval(&mut probe, original - h);
            probe.blocks_mut()[b].1.as_mut_slice()[i] = original;
            if !same_side(&pp) || !same_side(&pm) {
                report.skipped_kinks += 1;
                continue;
            }
            let fd = (lp - lm) / (2.0 * h);
            let an = g.as_slice()[i];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6);
            report.checked += 1;
            if rel > report.max_rel {
                report.max_rel = rel;
                report.worst = format!("{name}[{i}] analytic {an:e} numeric {fd:e}");
            }
        }
    }
    report
}
