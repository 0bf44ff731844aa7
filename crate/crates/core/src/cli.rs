//! The `meterdown` command line.
//!
//! Every subcommand writes its outputs to files and a `RunManifest` next to
//! them, recording the resolved configuration, the seed, and SHA-256 digests
//! of every input and output. Pipeline failures go to stderr as one JSON
//! object and exit with status 1; usage errors exit with status 2.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::evaluate::{auc, render_table, roc_points, run_experiment, EvalError, ExperimentConfig};
use crate::features::{parse_attributes, Attribute, FeatureError};
use crate::ingest::{parse_meters, parse_readings, IngestError, MeterRecord, RawReading};
use crate::label::{build_dataset, parse_schemes, write_windows, Example, LabelConfig, LabelError, Scheme};
use crate::models::{self, predict, train, Arch, Dims, FeatureEncoder, Model, ModelBundle, ModelError, TrainConfig};
use crate::neuralcore::AdamConfig;
use crate::seed;
use crate::synth::{generate, CategoricalMode, Fleet, FleetConfig, SynthError};
use crate::validate::{validate_fleet, ValidateError, DEFAULT_GAP_LIMIT_DAYS};

pub const READINGS_FILE: &str = "readings.csv";
pub const METERS_FILE: &str = "meters.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Ingest(_) => "ingest",
            CliError::Validate(_) => "validate",
            CliError::Label(_) => "label",
            CliError::Feature(_) => "features",
            CliError::Model(_) => "models",
            CliError::Eval(_) => "evaluate",
            CliError::Synth(_) => "synth",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "meterdown", version, about = "Water-meter failure prediction pipeline")]
pub struct Cli {
    /// Worker threads for fold and meter parallelism (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic fleet (readings.csv, meters.csv).
    Synth(SynthArgs),
    /// Apply the validity rules and report what was kept.
    Validate(ValidateArgs),
    /// Build labeled windows for one scheme.
    Label(LabelArgs),
    /// Train a classifier on every labeled window and save a bundle.
    Train(TrainArgs),
    /// Score a dataset with a saved bundle.
    Eval(EvalArgs),
    /// Cross-validation plus holdout test per scheme.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, env = "METERDOWN_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding readings.csv and meters.csv.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GAP_LIMIT_DAYS)]
    pub gap_limit_days: i64,
}

#[derive(Debug, Clone, Args)]
pub struct FleetArgs {
    /// Fleet configuration as JSON; flags below override its fields.
    #[arg(long)]
    pub fleet_config: Option<PathBuf>,
    #[arg(long)]
    pub defective_fraction: Option<f64>,
    #[arg(long)]
    pub categorical_mode: Option<CategoricalMode>,
    #[arg(long)]
    pub flip_prob: Option<f64>,
    #[arg(long)]
    pub precursor_fraction: Option<f64>,
    #[arg(long)]
    pub vacancy_fraction: Option<f64>,
}

impl FleetArgs {
    fn resolve(&self, meters: Option<usize>, seed_value: u64) -> Result<(FleetConfig, Vec<PathBuf>), CliError> {
        let mut inputs = Vec::new();
        let mut cfg = match &self.fleet_config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                inputs.push(path.clone());
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: invalid fleet config: {e}", path.display())))?
            }
            None => FleetConfig::default(),
        };
        if let Some(v) = meters {
            cfg.meters = v;
        }
        if let Some(v) = self.defective_fraction {
            cfg.defective_fraction = v;
        }
        if let Some(v) = self.categorical_mode {
            cfg.categorical_mode = v;
        }
        if let Some(v) = self.flip_prob {
            cfg.producer_flip_prob = v;
        }
        if let Some(v) = self.precursor_fraction {
            cfg.precursor_fraction = v;
        }
        if let Some(v) = self.vacancy_fraction {
            cfg.vacancy_fraction = v;
        }
        cfg.seed = seed_value;
        cfg.validate()?;
        Ok((cfg, inputs))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value = "dnn1")]
    pub arch: Arch,
    #[arg(long, default_value_t = 80)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    /// GRU state width.
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    /// Categorical attributes for dnn2, comma separated.
    #[arg(long, default_value = "producer,meter_type,year,contract")]
    pub attributes: String,
    /// Drop negative candidates whose segment already contains a plateau.
    #[arg(long)]
    pub exclude_plateau_negatives: bool,
}

impl TrainingArgs {
    fn train_config(&self, seed_value: u64) -> Result<TrainConfig, CliError> {
        let cfg = TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..AdamConfig::default()
            },
            seed: seed_value,
            hidden: self.hidden,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn attributes(&self) -> Result<Vec<Attribute>, CliError> {
        Ok(parse_attributes(&self.attributes)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub meters: Option<usize>,
    #[command(flatten)]
    pub fleet: FleetArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Summary JSON path.
    #[arg(long, default_value = "validation.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub scheme: Scheme,
    #[arg(long)]
    pub exclude_plateau_negatives: bool,
    /// Output directory for windows.csv and counts.json.
    #[arg(long, default_value = "labels")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub scheme: Scheme,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value = "bundle.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub bundle: PathBuf,
    /// Defaults to the scheme stored in the bundle.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub exclude_plateau_negatives: bool,
    #[arg(long, default_value = "eval.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Input directory; without it a fleet is generated from the seed.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GAP_LIMIT_DAYS)]
    pub gap_limit_days: i64,
    #[arg(long, default_value = "1p+1,1p+2,1p+3,1p+4")]
    pub schemes: String,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.8)]
    pub holdout_fraction: f64,
    /// Size of the generated fleet when `--data` is absent.
    #[arg(long)]
    pub fleet_meters: Option<usize>,
    #[command(flatten)]
    pub fleet: FleetArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Report JSON path; the text table goes next to it with a `.txt` extension.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    fn of(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Audit record written beside every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub threads: Option<usize>,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Small run results worth keeping with the audit trail.
    pub summary: Value,
}

struct Outcome {
    config: Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    summary: Value,
    manifest: PathBuf,
    stdout: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// `dir/report.json` → `dir/report.manifest.json`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

struct Inputs {
    readings: Vec<RawReading>,
    meters: BTreeMap<String, MeterRecord>,
    files: Vec<PathBuf>,
}

fn read_data(dir: &Path, need_meters: bool) -> Result<Inputs, CliError> {
    let rpath = dir.join(READINGS_FILE);
    let readings = parse_readings(fs::File::open(&rpath).map_err(io_err(&rpath))?)?;
    let mut files = vec![rpath];
    let meters = if need_meters {
        let mpath = dir.join(METERS_FILE);
        let m = parse_meters(fs::File::open(&mpath).map_err(io_err(&mpath))?)?;
        files.push(mpath);
        m
    } else {
        BTreeMap::new()
    };
    Ok(Inputs {
        readings,
        meters,
        files,
    })
}

fn fleet_inputs(fleet: &Fleet) -> Inputs {
    Inputs {
        readings: fleet.readings.clone(),
        meters: fleet.meters.iter().map(|m| (m.meter_id.clone(), m.clone())).collect(),
        files: Vec::new(),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<Outcome, CliError> {
    let seed_value = args.seed.seed;
    let (cfg, inputs) = args.fleet.resolve(args.meters, seed_value)?;
    let fleet = generate(&cfg)?;
    let (r, m) = fleet.to_csv()?;
    let rpath = args.out.join(READINGS_FILE);
    let mpath = args.out.join(METERS_FILE);
    write_file(&rpath, r)?;
    write_file(&mpath, m)?;
    let defective = fleet.meters.iter().filter(|m| m.defective).count();
    Ok(Outcome {
        config: to_value(&cfg),
        seeds: BTreeMap::from([("seed".into(), seed_value)]),
        inputs,
        outputs: vec![rpath, mpath],
        summary: json!({
            "meters": fleet.meters.len(),
            "defective": defective,
            "readings": fleet.readings.len(),
        }),
        manifest: args.out.join(MANIFEST_FILE),
        stdout: format!(
            "wrote {} meters ({} defective), {} readings to {}\n",
            fleet.meters.len(),
            defective,
            fleet.readings.len(),
            args.out.display()
        ),
    })
}

fn cmd_validate(args: &ValidateArgs) -> Result<Outcome, CliError> {
    let data = read_data(&args.data.data, false)?;
    let fleet = validate_fleet(&data.readings, args.data.gap_limit_days)?;
    let body = pretty(&fleet.summary);
    write_file(&args.out, &body)?;
    Ok(Outcome {
        config: json!({ "data": args.data.data.display().to_string(), "gap_limit_days": args.data.gap_limit_days }),
        seeds: BTreeMap::new(),
        inputs: data.files,
        outputs: vec![args.out.clone()],
        summary: Value::Null,
        manifest: sidecar(&args.out, "manifest.json"),
        stdout: body,
    })
}

fn cmd_label(args: &LabelArgs) -> Result<Outcome, CliError> {
    let data = read_data(&args.data.data, true)?;
    let fleet = validate_fleet(&data.readings, args.data.gap_limit_days)?;
    let config = LabelConfig {
        scheme: args.scheme,
        exclude_plateau_negatives: args.exclude_plateau_negatives,
    };
    let (dataset, counts) = build_dataset(&fleet.series, &data.meters, config)?;
    let wpath = args.out.join("windows.csv");
    let cpath = args.out.join("counts.json");
    let mut windows = Vec::new();
    write_windows(&mut windows, &dataset)?;
    write_file(&wpath, windows)?;
    let body = pretty(&counts);
    write_file(&cpath, &body)?;
    Ok(Outcome {
        config: json!({
            "data": args.data.data.display().to_string(),
            "gap_limit_days": args.data.gap_limit_days,
            "label": config,
        }),
        seeds: BTreeMap::new(),
        inputs: data.files,
        outputs: vec![wpath, cpath],
        summary: Value::Null,
        manifest: args.out.join(MANIFEST_FILE),
        stdout: body,
    })
}

fn cmd_train(args: &TrainArgs) -> Result<Outcome, CliError> {
    let seed_value = args.seed.seed;
    let data = read_data(&args.data.data, true)?;
    let fleet = validate_fleet(&data.readings, args.data.gap_limit_days)?;
    let label = LabelConfig {
        scheme: args.scheme,
        exclude_plateau_negatives: args.training.exclude_plateau_negatives,
    };
    let (dataset, counts) = build_dataset(&fleet.series, &data.meters, label)?;
    let attributes = args.training.attributes()?;
    let cfg = args.training.train_config(seed_value)?;
    let arch = args.training.arch;

    let examples: Vec<&Example> = dataset.examples.iter().collect();
    let encoder = FeatureEncoder::fit(arch, &examples, &dataset.meters, &attributes)?;
    let encoded = encoder.encode_all(&examples, &dataset)?;
    let dims = match arch {
        Arch::Dnn1 => Dims::dnn1(cfg.hidden),
        Arch::Dnn2 => Dims::dnn2(cfg.hidden, encoder.categorical_dim()),
    };
    let mut model = Model::init(arch, dims, seed::derive(seed_value, &[seed::FINAL_MODEL]))?;
    let history = train(&mut model, &encoded, &cfg)?;

    let mut bundle = ModelBundle::new(&model, encoder, Some(cfg.clone()));
    bundle.scheme = Some(args.scheme);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    models::save(&bundle, &args.out)?;
    let final_loss = history.last().copied().unwrap_or(f64::NAN);
    Ok(Outcome {
        config: json!({
            "data": args.data.data.display().to_string(),
            "gap_limit_days": args.data.gap_limit_days,
            "label": label,
            "arch": arch,
            "attributes": attributes,
            "train": cfg,
        }),
        seeds: BTreeMap::from([("seed".into(), seed_value)]),
        inputs: data.files,
        outputs: vec![args.out.clone()],
        summary: json!({ "counts": counts, "loss_history": history }),
        manifest: sidecar(&args.out, "manifest.json"),
        stdout: format!(
            "trained {arch} on {} windows ({} positive), final loss {final_loss:.6}, saved {}\n",
            dataset.examples.len(),
            dataset.positives(),
            args.out.display()
        ),
    })
}

#[derive(Debug, Serialize)]
struct ScoredWindow<'a> {
    meter_id: &'a str,
    label: bool,
    score: f64,
}

#[derive(Debug, Serialize)]
struct EvalReport<'a> {
    scheme: Scheme,
    arch: Arch,
    examples: usize,
    positives: usize,
    negatives: usize,
    auc: f64,
    roc: Vec<(f64, f64)>,
    scores: Vec<ScoredWindow<'a>>,
}

fn cmd_eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let bundle = models::load(&args.bundle)?;
    let model = bundle.model()?;
    let scheme = args
        .scheme
        .or(bundle.scheme)
        .ok_or_else(|| CliError::Usage("bundle records no scheme; pass --scheme".into()))?;
    let data = read_data(&args.data.data, true)?;
    let fleet = validate_fleet(&data.readings, args.data.gap_limit_days)?;
    let label = LabelConfig {
        scheme,
        exclude_plateau_negatives: args.exclude_plateau_negatives,
    };
    let (dataset, _) = build_dataset(&fleet.series, &data.meters, label)?;
    let examples: Vec<&Example> = dataset.examples.iter().collect();
    let encoded = bundle.encoder.encode_all(&examples, &dataset)?;
    let scores = predict(&model, &encoded)?;
    let labels: Vec<bool> = encoded.iter().map(|e| e.label).collect();
    let report = EvalReport {
        scheme,
        arch: bundle.arch,
        examples: examples.len(),
        positives: dataset.positives(),
        negatives: dataset.negatives(),
        auc: auc(&scores, &labels)?,
        roc: roc_points(&scores, &labels)?.points,
        scores: examples
            .iter()
            .zip(&scores)
            .map(|(e, &score)| ScoredWindow {
                meter_id: &e.meter_id,
                label: e.label,
                score,
            })
            .collect(),
    };
    write_file(&args.out, pretty(&report))?;
    let mut inputs = vec![args.bundle.clone()];
    inputs.extend(data.files);
    Ok(Outcome {
        config: json!({
            "data": args.data.data.display().to_string(),
            "gap_limit_days": args.data.gap_limit_days,
            "bundle": args.bundle.display().to_string(),
            "label": label,
        }),
        seeds: BTreeMap::new(),
        inputs,
        outputs: vec![args.out.clone()],
        summary: json!({ "auc": report.auc }),
        manifest: sidecar(&args.out, "manifest.json"),
        stdout: format!("{scheme} {} AUC {:.4} on {} windows\n", bundle.arch, report.auc, report.examples),
    })
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<Outcome, CliError> {
    let seed_value = args.seed.seed;
    let (data, fleet_cfg, mut inputs) = match &args.data {
        Some(dir) => {
            let d = read_data(dir, true)?;
            let files = d.files.clone();
            (d, None, files)
        }
        None => {
            let (cfg, inputs) = args.fleet.resolve(args.fleet_meters, seed_value)?;
            (fleet_inputs(&generate(&cfg)?), Some(cfg), inputs)
        }
    };
    inputs.sort();
    let fleet = validate_fleet(&data.readings, args.gap_limit_days)?;

    let mut config = ExperimentConfig::new(args.training.arch, parse_schemes(&args.schemes)?, seed_value);
    config.train = args.training.train_config(seed_value)?;
    config.folds = args.folds;
    config.holdout_fraction = args.holdout_fraction;
    config.attributes = args.training.attributes()?;
    config.exclude_plateau_negatives = args.training.exclude_plateau_negatives;

    let report = run_experiment(&fleet.series, &data.meters, &config)?;
    let table = render_table(&report);
    let tpath = args.out.with_extension("txt");
    write_file(&args.out, pretty(&report))?;
    write_file(&tpath, &table)?;
    Ok(Outcome {
        config: json!({
            "data": args.data.as_ref().map(|d| d.display().to_string()),
            "fleet": fleet_cfg,
            "gap_limit_days": args.gap_limit_days,
            "experiment": config,
        }),
        seeds: BTreeMap::from([("seed".into(), seed_value)]),
        inputs,
        outputs: vec![args.out.clone(), tpath],
        summary: Value::Null,
        manifest: sidecar(&args.out, "manifest.json"),
        stdout: table,
    })
}

fn execute(cli: &Cli, argv: &[String]) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (name, outcome) = match &cli.command {
        Command::Synth(a) => ("synth", cmd_synth(a)?),
        Command::Validate(a) => ("validate", cmd_validate(a)?),
        Command::Label(a) => ("label", cmd_label(a)?),
        Command::Train(a) => ("train", cmd_train(a)?),
        Command::Eval(a) => ("eval", cmd_eval(a)?),
        Command::Experiment(a) => ("experiment", cmd_experiment(a)?),
    };
    let manifest = RunManifest {
        tool: "meterdown".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        subcommand: name.into(),
        argv: argv.to_vec(),
        threads: cli.threads,
        config: outcome.config,
        seeds: outcome.seeds,
        inputs: outcome.inputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_, _>>()?,
        outputs: outcome.outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_, _>>()?,
        summary: outcome.summary,
    };
    write_file(&outcome.manifest, pretty(&manifest))?;
    Ok(outcome.stdout)
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &recorded) {
        Ok(stdout) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}
