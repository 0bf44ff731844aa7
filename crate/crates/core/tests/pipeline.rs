use std::collections::{BTreeMap, BTreeSet};

use meterdown::features::{encode_continuous, Scaler};
use meterdown::ingest::{parse_meters, parse_readings, RawReading};
use meterdown::label::{build_dataset, find_plateau, LabelConfig, Scheme};
use meterdown::synth::{generate, inject_quality_noise, FleetConfig, NoiseRates};
use meterdown::validate::{validate_fleet, DEFAULT_GAP_LIMIT_DAYS};

fn config() -> FleetConfig {
    FleetConfig {
        meters: 400,
        defective_fraction: 0.25,
        seed: 21,
        ..Default::default()
    }
}

#[test]
fn csv_round_trip_closes_the_loop() {
    let fleet = generate(&config()).unwrap();
    let (r, m) = fleet.to_csv().unwrap();
    let readings = parse_readings(r.as_slice()).unwrap();
    let meters = parse_meters(m.as_slice()).unwrap();
    assert_eq!(readings, fleet.readings);
    assert_eq!(meters.into_values().collect::<Vec<_>>(), fleet.meters);
}

#[test]
fn clean_fleet_survives_validation_and_labels_every_defect() {
    // Vacancies put plateaus on healthy meters; switch them off here.
    let fleet = generate(&FleetConfig {
        vacancy_fraction: 0.0,
        ..config()
    })
    .unwrap();
    let v = validate_fleet(&fleet.readings, DEFAULT_GAP_LIMIT_DAYS).unwrap();
    assert_eq!(v.summary.readings_kept, fleet.readings.len());
    assert_eq!(v.summary.gap_cuts, 0);
    let meters: BTreeMap<_, _> = fleet.meters.iter().map(|m| (m.meter_id.clone(), m.clone())).collect();
    for (id, segments) in &v.series {
        assert_eq!(find_plateau(&segments[0]).is_some(), meters[id].defective, "{id}");
    }
    let (dataset, counts) = build_dataset(&v.series, &meters, LabelConfig::new(Scheme::new(1, 1).unwrap())).unwrap();
    assert_eq!(counts.defective_without_plateau, 0);
    assert_eq!(counts.positives + counts.defective_short_history, counts.defective_meters);
    assert_eq!(counts.negatives + counts.non_defective_too_short, counts.non_defective_meters);
    for e in &dataset.examples {
        let x = encode_continuous(&e.window, &Scaler::identity()).unwrap();
        assert_eq!(x.len(), 1);
        let (d0, t0) = (e.window[1].value - e.window[0].value, (e.window[1].timestamp - e.window[0].timestamp).num_days());
        assert_eq!(x.steps[0], [d0, t0 as f64]);
    }
}

#[test]
fn vacancies_only_touch_healthy_meters() {
    let fleet = generate(&FleetConfig {
        vacancy_fraction: 0.5,
        ..config()
    })
    .unwrap();
    let v = validate_fleet(&fleet.readings, DEFAULT_GAP_LIMIT_DAYS).unwrap();
    let mut healthy_with_plateau = 0;
    for m in &fleet.meters {
        let has = find_plateau(&v.series[&m.meter_id][0]).is_some();
        if m.defective {
            assert!(has, "{}", m.meter_id);
        } else if has {
            healthy_with_plateau += 1;
            let span = find_plateau(&v.series[&m.meter_id][0]).unwrap();
            assert_eq!(span.length, 2, "a vacancy is a single idle interval");
        }
    }
    assert!(healthy_with_plateau > 0);
}

fn corrupted(original: &[RawReading], noisy: &[RawReading]) -> BTreeSet<usize> {
    original
        .iter()
        .zip(noisy)
        .enumerate()
        .filter(|(_, (a, b))| a.process_ok != b.process_ok || a.congruent != b.congruent)
        .map(|(i, _)| i)
        .collect()
}

#[test]
fn more_noise_never_keeps_more() {
    let fleet = generate(&config()).unwrap();
    let levels = [0.02, 0.1, 0.3];
    let mut previous: Option<(usize, usize, BTreeSet<usize>)> = None;
    for rate in levels {
        let rates = NoiseRates {
            process_fail: rate,
            incongruent: rate,
            gap: rate / 4.0,
            gap_limit_days: DEFAULT_GAP_LIMIT_DAYS,
        };
        let (noisy, log) = inject_quality_noise(&fleet.readings, rates, 8);
        let v = validate_fleet(&noisy, DEFAULT_GAP_LIMIT_DAYS).unwrap();
        let s = &v.summary;
        assert_eq!(s.dropped_process, log.process_flags_cleared);
        assert_eq!(s.dropped_incongruent + s.dropped_process, corrupted(&fleet.readings, &noisy).len());
        let bad = corrupted(&fleet.readings, &noisy);
        if let Some((kept, dropped, prev_bad)) = &previous {
            assert!(s.readings_kept <= *kept, "rate {rate}");
            assert!(s.dropped_process + s.dropped_incongruent >= *dropped, "rate {rate}");
            assert!(prev_bad.is_subset(&bad), "corruptions are nested");
        }
        previous = Some((s.readings_kept, s.dropped_process + s.dropped_incongruent, bad));
    }
}
