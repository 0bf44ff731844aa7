//! The two classifiers, their training loop, and the on-disk bundle.
//!
//! `Dnn1` reads only the reading sequence:
//!
//! ```text
//! GRU(2 → H) → dense 32 relu → dense 128 relu → dense 1 → sigmoid
//! ```
//!
//! `Dnn2` adds a categorical branch and merges by concatenation:
//!
//! ```text
//! GRU(2 → H) → dense 32 relu ─────────────┐
//!                                         ├─ concat (128) → dense 128 relu → dense 1 → sigmoid
//! one-hot (C) → dense 128 relu → dense 96 relu ┘
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    build_vocab, encode_categorical, encode_continuous, fit_scaler_on_windows, Attribute, CategoricalVocab,
    FeatureError, Scaler, STEP_FEATURES,
};
use crate::ingest::MeterRecord;
use crate::label::{Dataset, Example, Scheme};
use crate::neuralcore::{
    adam_step, bce_loss, gru_backward_into, gru_forward, sigmoid, Activation, AdamConfig, AdamState, Dense,
    GruParams, NeuralError, Parameters, Tensor2,
};
use crate::seed;

pub const SEQ_DENSE: usize = 32;
pub const DNN1_DENSE: usize = 128;
pub const CAT_DENSE_A: usize = 128;
pub const CAT_DENSE_B: usize = 96;
pub const HEAD_DENSE: usize = 128;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training set must contain both classes ({positives} positives, {negatives} negatives)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("input dimension mismatch: {0}")]
    Dimension(String),
    #[error("bundle format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt bundle: {0}")]
    Bundle(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Dnn1,
    Dnn2,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Dnn1 => "dnn1",
            Arch::Dnn2 => "dnn2",
        })
    }
}

impl FromStr for Arch {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dnn1" => Ok(Arch::Dnn1),
            "dnn2" => Ok(Arch::Dnn2),
            other => Err(ModelError::Config(format!("unknown architecture `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub input_dim: usize,
    pub hidden: usize,
    /// One-hot width fed to the categorical branch; zero for `Dnn1`.
    pub categorical: usize,
}

impl Dims {
    pub fn dnn1(hidden: usize) -> Self {
        Self {
            input_dim: STEP_FEATURES,
            hidden,
            categorical: 0,
        }
    }

    pub fn dnn2(hidden: usize, categorical: usize) -> Self {
        Self {
            input_dim: STEP_FEATURES,
            hidden,
            categorical,
        }
    }
}

/// Closed-form parameter counts.
pub fn expected_param_count(arch: Arch, dims: Dims) -> usize {
    let dense = |i: usize, o: usize| i * o + o;
    let gru = 3 * (dims.input_dim * dims.hidden + dims.hidden * dims.hidden + dims.hidden);
    match arch {
        Arch::Dnn1 => gru + dense(dims.hidden, SEQ_DENSE) + dense(SEQ_DENSE, DNN1_DENSE) + dense(DNN1_DENSE, 1),
        Arch::Dnn2 => {
            gru + dense(dims.hidden, SEQ_DENSE)
                + dense(dims.categorical, CAT_DENSE_A)
                + dense(CAT_DENSE_A, CAT_DENSE_B)
                + dense(SEQ_DENSE + CAT_DENSE_B, HEAD_DENSE)
                + dense(HEAD_DENSE, 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dnn1 {
    pub gru: GruParams,
    pub dense_a: Dense,
    pub dense_b: Dense,
    pub out: Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dnn2 {
    pub gru: GruParams,
    pub dense_a: Dense,
    pub cat_a: Dense,
    pub cat_b: Dense,
    pub head: Dense,
    pub out: Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Dnn1(Dnn1),
    Dnn2(Dnn2),
}

/// One encoded example: the step sequence (`T x 2`) plus the one-hot
/// categorical vector (empty for `Dnn1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedExample {
    pub sequence: Tensor2,
    pub categorical: Vec<f64>,
    pub label: bool,
}

fn prefixed<'a>(prefix: &str, blocks: Vec<(String, &'a Tensor2)>) -> impl Iterator<Item = (String, &'a Tensor2)> {
    let prefix = prefix.to_string();
    blocks.into_iter().map(move |(n, t)| (format!("{prefix}.{n}"), t))
}

fn prefixed_mut<'a>(
    prefix: &str,
    blocks: Vec<(String, &'a mut Tensor2)>,
) -> impl Iterator<Item = (String, &'a mut Tensor2)> {
    let prefix = prefix.to_string();
    blocks.into_iter().map(move |(n, t)| (format!("{prefix}.{n}"), t))
}

impl Parameters for Model {
    fn blocks(&self) -> Vec<(String, &Tensor2)> {
        match self {
            Model::Dnn1(m) => prefixed("gru", m.gru.blocks())
                .chain(prefixed("dense_a", m.dense_a.blocks()))
                .chain(prefixed("dense_b", m.dense_b.blocks()))
                .chain(prefixed("out", m.out.blocks()))
                .collect(),
            Model::Dnn2(m) => prefixed("gru", m.gru.blocks())
                .chain(prefixed("dense_a", m.dense_a.blocks()))
                .chain(prefixed("cat_a", m.cat_a.blocks()))
                .chain(prefixed("cat_b", m.cat_b.blocks()))
                .chain(prefixed("head", m.head.blocks()))
                .chain(prefixed("out", m.out.blocks()))
                .collect(),
        }
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Tensor2)> {
        match self {
            Model::Dnn1(m) => prefixed_mut("gru", m.gru.blocks_mut())
                .chain(prefixed_mut("dense_a", m.dense_a.blocks_mut()))
                .chain(prefixed_mut("dense_b", m.dense_b.blocks_mut()))
                .chain(prefixed_mut("out", m.out.blocks_mut()))
                .collect(),
            Model::Dnn2(m) => prefixed_mut("gru", m.gru.blocks_mut())
                .chain(prefixed_mut("dense_a", m.dense_a.blocks_mut()))
                .chain(prefixed_mut("cat_a", m.cat_a.blocks_mut()))
                .chain(prefixed_mut("cat_b", m.cat_b.blocks_mut()))
                .chain(prefixed_mut("head", m.head.blocks_mut()))
                .chain(prefixed_mut("out", m.out.blocks_mut()))
                .collect(),
        }
    }
}

impl Model {
    /// Seeded glorot-uniform initialization with zero biases.
    pub fn init(arch: Arch, dims: Dims, seed_value: u64) -> Result<Self, ModelError> {
        if dims.input_dim == 0 || dims.hidden == 0 {
            return Err(ModelError::Config("input_dim and hidden must be positive".into()));
        }
        let mut rng = seed::rng(seed_value, &[seed::INIT]);
        let gru = GruParams::init(dims.input_dim, dims.hidden, &mut rng);
        let dense_a = Dense::init(dims.hidden, SEQ_DENSE, Activation::Relu, &mut rng);
        Ok(match arch {
            Arch::Dnn1 => Model::Dnn1(Dnn1 {
                gru,
                dense_a,
                dense_b: Dense::init(SEQ_DENSE, DNN1_DENSE, Activation::Relu, &mut rng),
                out: Dense::init(DNN1_DENSE, 1, Activation::Identity, &mut rng),
            }),
            Arch::Dnn2 => {
                if dims.categorical == 0 {
                    return Err(ModelError::Config("dnn2 needs a non-empty categorical vector".into()));
                }
                Model::Dnn2(Dnn2 {
                    gru,
                    dense_a,
                    cat_a: Dense::init(dims.categorical, CAT_DENSE_A, Activation::Relu, &mut rng),
                    cat_b: Dense::init(CAT_DENSE_A, CAT_DENSE_B, Activation::Relu, &mut rng),
                    head: Dense::init(SEQ_DENSE + CAT_DENSE_B, HEAD_DENSE, Activation::Relu, &mut rng),
                    out: Dense::init(HEAD_DENSE, 1, Activation::Identity, &mut rng),
                })
            }
        })
    }

    pub fn arch(&self) -> Arch {
        match self {
            Model::Dnn1(_) => Arch::Dnn1,
            Model::Dnn2(_) => Arch::Dnn2,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            Model::Dnn1(m) => Dims::dnn1(m.gru.hidden()),
            Model::Dnn2(m) => Dims::dnn2(m.gru.hidden(), m.cat_a.inputs()),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.zero_grad();
        z
    }

    fn check_input(&self, input: &EncodedExample) -> Result<(), ModelError> {
        let dims = self.dims();
        if input.sequence.cols() != dims.input_dim || input.sequence.rows() == 0 {
            return Err(ModelError::Dimension(format!(
                "sequence is {:?}, model expects T x {}",
                input.sequence.shape(),
                dims.input_dim
            )));
        }
        if input.categorical.len() != dims.categorical {
            return Err(ModelError::Dimension(format!(
                "categorical vector has {} entries, model expects {}",
                input.categorical.len(),
                dims.categorical
            )));
        }
        Ok(())
    }

    fn run(&self, input: &EncodedExample) -> Result<Trace, ModelError> {
        self.check_input(input)?;
        let dims = self.dims();
        let h0 = vec![0.0; dims.hidden];
        match self {
            Model::Dnn1(m) => {
                let gru = gru_forward(&m.gru, &input.sequence, &h0)?;
                let a = m.dense_a.forward(gru.final_state())?;
                let b = m.dense_b.forward(&a.output)?;
                let out = m.out.forward(&b.output)?;
                Ok(Trace::Dnn1 { gru, a, b, out })
            }
            Model::Dnn2(m) => {
                let gru = gru_forward(&m.gru, &input.sequence, &h0)?;
                let a = m.dense_a.forward(gru.final_state())?;
                let ca = m.cat_a.forward(&input.categorical)?;
                let cb = m.cat_b.forward(&ca.output)?;
                let merged = [a.output.as_slice(), cb.output.as_slice()].concat();
                let head = m.head.forward(&merged)?;
                let out = m.out.forward(&head.output)?;
                Ok(Trace::Dnn2 {
                    gru,
                    a,
                    ca,
                    cb,
                    head,
                    out,
                })
            }
        }
    }

    pub fn logit(&self, input: &EncodedExample) -> Result<f64, ModelError> {
        Ok(self.run(input)?.logit())
    }

    /// Probability of the defective class.
    pub fn forward(&self, input: &EncodedExample) -> Result<f64, ModelError> {
        Ok(sigmoid(self.logit(input)?))
    }

    /// Every relu pre-activation of the forward pass, in layer order.
    pub fn relu_preactivations(&self, input: &EncodedExample) -> Result<Vec<f64>, ModelError> {
        Ok(self.loss_and_relu_preactivations(input)?.1)
    }

    /// Loss and relu pre-activations from a single forward pass; finite
    /// difference checks use the latter to spot perturbations that cross a
    /// kink.
    pub fn loss_and_relu_preactivations(&self, input: &EncodedExample) -> Result<(f64, Vec<f64>), ModelError> {
        let trace = self.run(input)?;
        let (loss, _) = bce_loss(sigmoid(trace.logit()), if input.label { 1.0 } else { 0.0 })?;
        let pre = match trace {
            Trace::Dnn1 { a, b, .. } => [a.pre, b.pre].concat(),
            Trace::Dnn2 { a, ca, cb, head, .. } => [a.pre, ca.pre, cb.pre, head.pre].concat(),
        };
        Ok((loss, pre))
    }

    /// Binary cross-entropy loss for one example; its parameter gradient is
    /// added into `grads`.
    pub fn loss_and_grad_into(&self, input: &EncodedExample, grads: &mut Model) -> Result<f64, ModelError> {
        let trace = self.run(input)?;
        let p = sigmoid(trace.logit());
        let (loss, dlogit) = bce_loss(p, if input.label { 1.0 } else { 0.0 })?;
        match (self, grads, trace) {
            (Model::Dnn1(m), Model::Dnn1(g), Trace::Dnn1 { gru, a, b, out }) => {
                let d = m.out.backward_into(&out, &[dlogit], &mut g.out)?;
                let d = m.dense_b.backward_into(&b, &d, &mut g.dense_b)?;
                let d = m.dense_a.backward_into(&a, &d, &mut g.dense_a)?;
                gru_backward_into(&m.gru, &gru, &d, &mut g.gru)?;
            }
            (
                Model::Dnn2(m),
                Model::Dnn2(g),
                Trace::Dnn2 {
                    gru,
                    a,
                    ca,
                    cb,
                    head,
                    out,
                },
            ) => {
                let d = m.out.backward_into(&out, &[dlogit], &mut g.out)?;
                let d = m.head.backward_into(&head, &d, &mut g.head)?;
                let (d_seq, d_cat) = d.split_at(SEQ_DENSE);
                let d = m.cat_b.backward_into(&cb, d_cat, &mut g.cat_b)?;
                m.cat_a.backward_into(&ca, &d, &mut g.cat_a)?;
                let d = m.dense_a.backward_into(&a, d_seq, &mut g.dense_a)?;
                gru_backward_into(&m.gru, &gru, &d, &mut g.gru)?;
            }
            _ => return Err(ModelError::Dimension("gradient buffer architecture differs from model".into())),
        }
        Ok(loss)
    }

    pub fn loss_and_grad(&self, input: &EncodedExample) -> Result<(f64, Model), ModelError> {
        let mut grads = self.zeros_like();
        let loss = self.loss_and_grad_into(input, &mut grads)?;
        Ok((loss, grads))
    }

    pub fn loss(&self, input: &EncodedExample) -> Result<f64, ModelError> {
        let p = self.forward(input)?;
        Ok(bce_loss(p, if input.label { 1.0 } else { 0.0 })?.0)
    }
}

enum Trace {
    Dnn1 {
        gru: crate::neuralcore::GruCache,
        a: crate::neuralcore::DenseCache,
        b: crate::neuralcore::DenseCache,
        out: crate::neuralcore::DenseCache,
    },
    Dnn2 {
        gru: crate::neuralcore::GruCache,
        a: crate::neuralcore::DenseCache,
        ca: crate::neuralcore::DenseCache,
        cb: crate::neuralcore::DenseCache,
        head: crate::neuralcore::DenseCache,
        out: crate::neuralcore::DenseCache,
    },
}

impl Trace {
    fn logit(&self) -> f64 {
        match self {
            Trace::Dnn1 { out, .. } | Trace::Dnn2 { out, .. } => out.output[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 80,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            hidden: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch_size must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(ModelError::Config("hidden size must be at least 1".into()));
        }
        if !(self.adam.learning_rate > 0.0) {
            return Err(ModelError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Mini-batch Adam on mean binary cross-entropy.
///
/// Each epoch visits the examples in an order drawn from `(seed, epoch)`
/// over positions `0..n`, so the same seed and the same input order give the
/// same trajectory. Returns the mean training loss of each epoch.
pub fn train(model: &mut Model, data: &[EncodedExample], config: &TrainConfig) -> Result<Vec<f64>, ModelError> {
    config.validate()?;
    let positives = data.iter().filter(|e| e.label).count();
    let negatives = data.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(ModelError::SingleClass { positives, negatives });
    }
    for e in data {
        model.check_input(e)?;
    }

    let mut state = AdamState::new(model, config.adam);
    let mut grads = model.zeros_like();
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        let mut rng = seed::rng(config.seed, &[seed::SHUFFLE, epoch as u64]);
        order.iter_mut().enumerate().for_each(|(i, o)| *o = i);
        order.shuffle(&mut rng);

        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.zero_grad();
            for &i in batch {
                total += model.loss_and_grad_into(&data[i], &mut grads)?;
            }
            let k = 1.0 / batch.len() as f64;
            for (_, g) in grads.blocks_mut() {
                g.scale(k);
            }
            adam_step(model, &grads, &mut state)?;
        }
        history.push(total / data.len() as f64);
    }
    Ok(history)
}

pub fn predict(model: &Model, data: &[EncodedExample]) -> Result<Vec<f64>, ModelError> {
    data.par_iter().map(|e| model.forward(e)).collect()
}

/// Fitted preprocessing for one model: the step scaler and, for `Dnn2`,
/// the categorical vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub scaler: Scaler,
    pub vocab: Option<CategoricalVocab>,
}

impl FeatureEncoder {
    /// Fits on training examples only.
    pub fn fit(
        arch: Arch,
        train: &[&Example],
        meters: &BTreeMap<String, MeterRecord>,
        attributes: &[Attribute],
    ) -> Result<Self, ModelError> {
        let scaler = fit_scaler_on_windows(train.iter().map(|e| e.window.as_slice()))?;
        let vocab = match arch {
            Arch::Dnn1 => None,
            Arch::Dnn2 => {
                let records = train
                    .iter()
                    .map(|e| {
                        meters
                            .get(&e.meter_id)
                            .ok_or_else(|| ModelError::Dimension(format!("no metadata for meter `{}`", e.meter_id)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(build_vocab(records, attributes)?)
            }
        };
        Ok(Self { scaler, vocab })
    }

    pub fn categorical_dim(&self) -> usize {
        self.vocab.as_ref().map_or(0, CategoricalVocab::dim)
    }

    pub fn encode(&self, example: &Example, meter: Option<&MeterRecord>) -> Result<EncodedExample, ModelError> {
        let steps = encode_continuous(&example.window, &self.scaler)?;
        let sequence = Tensor2::new(
            steps.len(),
            STEP_FEATURES,
            steps.steps.iter().flat_map(|s| s.iter().copied()).collect(),
        )?;
        let categorical = match (&self.vocab, meter) {
            (None, _) => Vec::new(),
            (Some(v), Some(m)) => encode_categorical(m, v),
            (Some(_), None) => {
                return Err(ModelError::Dimension(format!(
                    "no metadata for meter `{}`",
                    example.meter_id
                )))
            }
        };
        Ok(EncodedExample {
            sequence,
            categorical,
            label: example.label,
        })
    }

    pub fn encode_all(&self, examples: &[&Example], dataset: &Dataset) -> Result<Vec<EncodedExample>, ModelError> {
        examples
            .iter()
            .map(|e| self.encode(e, dataset.meters.get(&e.meter_id)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Everything needed to score new windows: architecture, shapes, named
/// parameter arrays and the fitted encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub arch: Arch,
    pub dims: Dims,
    pub encoder: FeatureEncoder,
    pub train_config: Option<TrainConfig>,
    /// Window scheme the model was trained on, if known.
    #[serde(default)]
    pub scheme: Option<Scheme>,
    pub params: Vec<NamedBlock>,
}

impl ModelBundle {
    pub fn new(model: &Model, encoder: FeatureEncoder, train_config: Option<TrainConfig>) -> Self {
        Self {
            format_version: BUNDLE_FORMAT_VERSION,
            arch: model.arch(),
            dims: model.dims(),
            encoder,
            train_config,
            scheme: None,
            params: model
                .blocks()
                .into_iter()
                .map(|(name, t)| NamedBlock {
                    name,
                    rows: t.rows(),
                    cols: t.cols(),
                    data: t.as_slice().to_vec(),
                })
                .collect(),
        }
    }

    /// Rebuilds the model, checking every block's name and shape.
    pub fn model(&self) -> Result<Model, ModelError> {
        if self.format_version != BUNDLE_FORMAT_VERSION {
            return Err(ModelError::Version {
                found: self.format_version,
                expected: BUNDLE_FORMAT_VERSION,
            });
        }
        if self.encoder.categorical_dim() != self.dims.categorical {
            return Err(ModelError::Bundle(format!(
                "vocabulary width {} differs from model width {}",
                self.encoder.categorical_dim(),
                self.dims.categorical
            )));
        }
        let mut model = Model::init(self.arch, self.dims, 0)?;
        let mut blocks = model.blocks_mut();
        if blocks.len() != self.params.len() {
            return Err(ModelError::Bundle(format!(
                "expected {} parameter blocks, found {}",
                blocks.len(),
                self.params.len()
            )));
        }
        for ((name, t), stored) in blocks.iter_mut().zip(&self.params) {
            if *name != stored.name || t.shape() != (stored.rows, stored.cols) || stored.data.len() != t.len() {
                return Err(ModelError::Bundle(format!(
                    "block `{}` {}x{} does not match expected `{}` {:?}",
                    stored.name,
                    stored.rows,
                    stored.cols,
                    name,
                    t.shape()
                )));
            }
            if stored.data.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::Bundle(format!("block `{name}` holds non-finite values")));
            }
            t.as_mut_slice().copy_from_slice(&stored.data);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string(self).map_err(|e| ModelError::Bundle(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        struct Probe {
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text).map_err(|e| ModelError::Bundle(e.to_string()))?;
        if probe.format_version != BUNDLE_FORMAT_VERSION {
            return Err(ModelError::Version {
                found: probe.format_version,
                expected: BUNDLE_FORMAT_VERSION,
            });
        }
        let bundle: Self = serde_json::from_str(text).map_err(|e| ModelError::Bundle(e.to_string()))?;
        bundle.model()?;
        Ok(bundle)
    }
}

pub fn save(bundle: &ModelBundle, path: &Path) -> Result<(), ModelError> {
    fs::write(path, bundle.to_json()?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelBundle, ModelError> {
    ModelBundle::from_json(&fs::read_to_string(path)?)
}
