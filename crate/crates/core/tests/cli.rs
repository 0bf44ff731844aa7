use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn meterdown(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meterdown"))
        .current_dir(dir)
        .env_remove("METERDOWN_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = meterdown(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_writes_two_csvs_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["synth", "--meters", "100", "--seed", "1", "--out", "fleet/"]);
    let fleet = tmp.path().join("fleet");
    let readings = fs::read_to_string(fleet.join("readings.csv")).unwrap();
    let meters = fs::read_to_string(fleet.join("meters.csv")).unwrap();
    assert!(readings.starts_with("meter_id,timestamp,value,process_ok,congruent\n"));
    assert_eq!(meters.lines().count(), 101);

    let manifest = json(&fleet.join("manifest.json"));
    assert_eq!(manifest["subcommand"], "synth");
    assert_eq!(manifest["seeds"]["seed"], 1);
    assert_eq!(manifest["config"]["meters"], 100);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_meterdown"));
        c.current_dir(tmp.path()).env_remove("METERDOWN_SEED").args(args);
        if let Some(v) = env {
            c.env("METERDOWN_SEED", v);
        }
        assert!(c.output().unwrap().status.success());
    };
    run(Some("9"), &["synth", "--meters", "20", "--out", "a"]);
    run(None, &["synth", "--meters", "20", "--seed", "9", "--out", "b"]);
    run(None, &["synth", "--meters", "20", "--out", "c"]);
    let read = |d: &str| fs::read(tmp.path().join(d).join("readings.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn pipeline_subcommands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--meters", "200", "--defective-fraction", "0.25", "--seed", "4", "--out", "fleet"]);

    let summary: Value = serde_json::from_str(&ok(d, &["validate", "--data", "fleet", "--out", "v.json"])).unwrap();
    assert_eq!(summary["meters_in"], 200);
    assert_eq!(summary, json(&d.join("v.json")));
    assert_eq!(json(&d.join("v.manifest.json"))["inputs"].as_array().unwrap().len(), 1);

    ok(d, &["label", "--data", "fleet", "--scheme", "1p+2", "--out", "lab"]);
    let counts = json(&d.join("lab/counts.json"));
    let windows = fs::read_to_string(d.join("lab/windows.csv")).unwrap();
    let examples = counts["positives"].as_u64().unwrap() + counts["negatives"].as_u64().unwrap();
    assert_eq!(windows.lines().count() as u64, 1 + 3 * examples);

    ok(d, &["train", "--data", "fleet", "--scheme", "1p+2", "--arch", "dnn2", "--epochs", "3", "--seed", "2", "--out", "m/bundle.json"]);
    let manifest = json(&d.join("m/bundle.manifest.json"));
    assert_eq!(manifest["summary"]["loss_history"].as_array().unwrap().len(), 3);

    ok(d, &["eval", "--data", "fleet", "--bundle", "m/bundle.json", "--out", "e.json"]);
    let eval = json(&d.join("e.json"));
    let auc = eval["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert_eq!(eval["scores"].as_array().unwrap().len() as u64, examples);
}

#[test]
fn experiment_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "experiment", "--arch", "dnn1", "--schemes", "1p+1,1p+2", "--seed", "3", "--fleet-meters", "250",
            "--defective-fraction", "0.2", "--epochs", "4", "--folds", "3", "--out", out,
        ]
    };
    let table = ok(tmp.path(), &args("a.json"));
    ok(tmp.path(), &args("b.json"));
    let a = fs::read(tmp.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b.json")).unwrap());
    assert_eq!(table, fs::read_to_string(tmp.path().join("a.txt")).unwrap());

    let report: Value = serde_json::from_slice(&a).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["fold_aucs"].as_array().unwrap().len(), 3);
    let header = table.lines().nth(1).unwrap();
    let cols: Vec<&str> = header.split_whitespace().collect();
    assert_eq!(cols, ["Readings", "Cross-validation", "Testing"]);
    assert!(table.contains("1P + 1") && table.contains("1P + 2"));
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = meterdown(tmp.path(), &["synth", "--out", "x", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn pipeline_errors_exit_1_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = meterdown(d, &["validate", "--data", "missing"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");

    fs::create_dir(d.join("bad")).unwrap();
    fs::write(d.join("bad/readings.csv"), "meter_id,timestamp,value,process_ok,congruent\nm1,2020-13-01,1,1,1\n").unwrap();
    let out = meterdown(d, &["validate", "--data", "bad"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ingest");

    let out = meterdown(d, &["synth", "--meters", "10", "--defective-fraction", "1.5", "--out", "f"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "synth");
}
