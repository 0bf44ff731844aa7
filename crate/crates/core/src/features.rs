//! Model inputs: standardized per-step continuous features and one-hot
//! categorical vectors.
//!
//! Each step of a window of `L` readings becomes the pair
//! `(consumption delta, gap in days)`, so a window yields `L - 1` steps.
//! Scalers and vocabularies are fit on training data only and are immutable
//! afterwards.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::MeterRecord;
use crate::validate::Point;

pub const STEP_FEATURES: usize = 2;

/// Standard deviations below this are treated as a constant feature.
const MIN_STD: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("window has {0} readings, need at least 2")]
    ShortWindow(usize),
    #[error("cannot fit on an empty training set")]
    EmptyTraining,
    #[error("unknown categorical attribute `{0}`")]
    UnknownAttribute(String),
}

pub type Step = [f64; STEP_FEATURES];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousInput {
    pub steps: Vec<Step>,
}

impl ContinuousInput {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: [f64; STEP_FEATURES],
    pub std: [f64; STEP_FEATURES],
}

impl Scaler {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; STEP_FEATURES],
            std: [1.0; STEP_FEATURES],
        }
    }

    fn apply(&self, raw: Step) -> Step {
        std::array::from_fn(|j| (raw[j] - self.mean[j]) / self.std[j])
    }

    pub fn invert(&self, input: &ContinuousInput) -> Vec<Step> {
        input
            .steps
            .iter()
            .map(|s| std::array::from_fn(|j| s[j] * self.std[j] + self.mean[j]))
            .collect()
    }
}

fn raw_steps(window: &[Point]) -> Result<Vec<Step>, FeatureError> {
    if window.len() < 2 {
        return Err(FeatureError::ShortWindow(window.len()));
    }
    Ok(window
        .windows(2)
        .map(|w| {
            [
                w[1].value - w[0].value,
                (w[1].timestamp - w[0].timestamp).num_days() as f64,
            ]
        })
        .collect())
}

pub fn encode_continuous(window: &[Point], scaler: &Scaler) -> Result<ContinuousInput, FeatureError> {
    Ok(ContinuousInput {
        steps: raw_steps(window)?.into_iter().map(|s| scaler.apply(s)).collect(),
    })
}

/// Z-score statistics over every step of the given (unscaled) inputs.
pub fn fit_scaler(training: &[ContinuousInput]) -> Result<Scaler, FeatureError> {
    let steps: Vec<&Step> = training.iter().flat_map(|c| c.steps.iter()).collect();
    if steps.is_empty() {
        return Err(FeatureError::EmptyTraining);
    }
    let n = steps.len() as f64;
    let mut mean = [0.0; STEP_FEATURES];
    let mut std = [0.0; STEP_FEATURES];
    for j in 0..STEP_FEATURES {
        mean[j] = steps.iter().map(|s| s[j]).sum::<f64>() / n;
        let var = steps.iter().map(|s| (s[j] - mean[j]).powi(2)).sum::<f64>() / n;
        std[j] = var.sqrt();
        if !(std[j] > MIN_STD) {
            std[j] = 1.0;
        }
    }
    Ok(Scaler { mean, std })
}

pub fn fit_scaler_on_windows<'a, I>(windows: I) -> Result<Scaler, FeatureError>
where
    I: IntoIterator<Item = &'a [Point]>,
{
    let raw = windows
        .into_iter()
        .map(|w| encode_continuous(w, &Scaler::identity()))
        .collect::<Result<Vec<_>, _>>()?;
    fit_scaler(&raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Producer,
    MeterType,
    YearOfConstruction,
    ContractType,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Producer,
        Attribute::MeterType,
        Attribute::YearOfConstruction,
        Attribute::ContractType,
    ];

    pub fn value(&self, meter: &MeterRecord) -> String {
        match self {
            Attribute::Producer => meter.producer.clone(),
            Attribute::MeterType => meter.meter_type.clone(),
            Attribute::YearOfConstruction => meter.year_of_construction.to_string(),
            Attribute::ContractType => meter.contract_type.clone(),
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribute::Producer => "producer",
            Attribute::MeterType => "meter_type",
            Attribute::YearOfConstruction => "year",
            Attribute::ContractType => "contract",
        })
    }
}

impl FromStr for Attribute {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "producer" => Ok(Attribute::Producer),
            "meter_type" => Ok(Attribute::MeterType),
            "year" | "year_of_construction" => Ok(Attribute::YearOfConstruction),
            "contract" | "contract_type" => Ok(Attribute::ContractType),
            other => Err(FeatureError::UnknownAttribute(other.to_string())),
        }
    }
}

pub fn parse_attributes(list: &str) -> Result<Vec<Attribute>, FeatureError> {
    let set: BTreeSet<Attribute> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    Ok(set.into_iter().collect())
}

/// Observed categories per enabled attribute, each list sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalVocab {
    pub attributes: Vec<Attribute>,
    pub categories: Vec<Vec<String>>,
}

impl CategoricalVocab {
    pub fn dim(&self) -> usize {
        self.categories.iter().map(Vec::len).sum()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.categories.iter().map(Vec::len).collect()
    }
}

pub fn build_vocab<'a, I>(training: I, attributes: &[Attribute]) -> Result<CategoricalVocab, FeatureError>
where
    I: IntoIterator<Item = &'a MeterRecord>,
{
    let mut sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); attributes.len()];
    let mut any = false;
    for meter in training {
        any = true;
        for (set, attr) in sets.iter_mut().zip(attributes) {
            set.insert(attr.value(meter));
        }
    }
    if !any {
        return Err(FeatureError::EmptyTraining);
    }
    Ok(CategoricalVocab {
        attributes: attributes.to_vec(),
        categories: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

/// One one-hot block per attribute; categories outside the vocabulary
/// encode as an all-zero block.
pub fn encode_categorical(meter: &MeterRecord, vocab: &CategoricalVocab) -> Vec<f64> {
    let mut out = vec![0.0; vocab.dim()];
    let mut offset = 0;
    for (attr, cats) in vocab.attributes.iter().zip(&vocab.categories) {
        let v = attr.value(meter);
        if let Ok(i) = cats.binary_search(&v) {
            out[offset + i] = 1.0;
        }
        offset += cats.len();
    }
    out
}
