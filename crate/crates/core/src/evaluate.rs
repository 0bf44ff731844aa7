//! ROC/AUC, stratified splits and the experiment runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::Attribute;
use crate::ingest::MeterRecord;
use crate::label::{build_dataset, CountsReport, Dataset, Example, LabelConfig, LabelError, Scheme};
use crate::models::{predict, train, Arch, Dims, FeatureEncoder, Model, ModelError, TrainConfig};
use crate::seed;
use crate::validate::ValidSeries;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least one positive and one negative ({positives} positives, {negatives} negatives)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("scores and labels differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("score at index {0} is not finite")]
    NonFinite(usize),
    #[error("split: {0}")]
    Split(String),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_scores(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::Length(scores.len(), labels.len()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass { positives, negatives });
    }
    Ok((positives, negatives))
}

/// Mann-Whitney AUC: probability that a random positive outscores a random
/// negative, ties counting one half. Computed from mid-ranks.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let (positives, negatives) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum += mid * tied_pos as f64;
        i = j + 1;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// ROC points from a descending threshold sweep, one per distinct score,
/// from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }
}

pub fn roc_points(scores: &[f64], labels: &[bool]) -> Result<RocCurve, EvalError> {
    let (positives, negatives) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    Ok(RocCurve { points })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn class_indices(labels: &[bool], positive: bool, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == positive).collect();
    idx.shuffle(rng);
    idx
}

/// Stratified holdout over example indices. The training share is
/// `round(fraction * n)`; positives get `round(fraction * n_pos)` of it.
pub fn holdout_split(labels: &[bool], fraction: f64, seed_value: u64) -> Result<Split, EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::Split(format!("fraction must be in (0, 1), got {fraction}")));
    }
    let mut rng = seed::rng(seed_value, &[seed::HOLDOUT]);
    let pos = class_indices(labels, true, &mut rng);
    let neg = class_indices(labels, false, &mut rng);
    if pos.len() < 2 || neg.len() < 2 {
        return Err(EvalError::Split(format!(
            "each class needs at least 2 examples ({} positives, {} negatives)",
            pos.len(),
            neg.len()
        )));
    }
    let total = (fraction * labels.len() as f64).round() as usize;
    let pos_train = ((fraction * pos.len() as f64).round() as usize).clamp(1, pos.len() - 1);
    let neg_train = total.saturating_sub(pos_train).clamp(1, neg.len() - 1);

    let mut train: Vec<usize> = pos[..pos_train].iter().chain(&neg[..neg_train]).copied().collect();
    let mut test: Vec<usize> = pos[pos_train..].iter().chain(&neg[neg_train..]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Stratified k-fold partition of `0..labels.len()`. Shuffled positives are
/// dealt round-robin, then negatives continue the deal, so fold sizes and
/// per-fold class counts each differ by at most one.
pub fn kfold(labels: &[bool], k: usize, seed_value: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::Split(format!("k must be at least 2, got {k}")));
    }
    let mut rng = seed::rng(seed_value, &[seed::KFOLD]);
    let pos = class_indices(labels, true, &mut rng);
    let neg = class_indices(labels, false, &mut rng);
    if pos.len() < k || neg.len() < k {
        return Err(EvalError::Split(format!(
            "{k}-fold needs at least {k} examples per class ({} positives, {} negatives)",
            pos.len(),
            neg.len()
        )));
    }
    let mut folds = vec![Vec::new(); k];
    for (i, idx) in pos.into_iter().chain(neg).enumerate() {
        folds[i % k].push(idx);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub arch: Arch,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub train: TrainConfig,
    pub folds: usize,
    pub holdout_fraction: f64,
    pub attributes: Vec<Attribute>,
    pub exclude_plateau_negatives: bool,
}

impl ExperimentConfig {
    pub fn new(arch: Arch, schemes: Vec<Scheme>, seed_value: u64) -> Self {
        Self {
            arch,
            schemes,
            seed: seed_value,
            train: TrainConfig {
                seed: seed_value,
                ..TrainConfig::default()
            },
            folds: 10,
            holdout_fraction: 0.8,
            attributes: Attribute::ALL.to_vec(),
            exclude_plateau_negatives: false,
        }
    }
}

/// Fits the encoder on `train_idx`, trains a fresh model and scores
/// `eval_idx`.
pub fn fit_and_score(
    dataset: &Dataset,
    train_idx: &[usize],
    eval_idx: &[usize],
    arch: Arch,
    attributes: &[Attribute],
    config: &TrainConfig,
    model_seed: u64,
) -> Result<(f64, Model, FeatureEncoder), EvalError> {
    let pick = |idx: &[usize]| -> Vec<&Example> { idx.iter().map(|&i| &dataset.examples[i]).collect() };
    let train_ex = pick(train_idx);
    let eval_ex = pick(eval_idx);
    let encoder = FeatureEncoder::fit(arch, &train_ex, &dataset.meters, attributes)?;
    let train_set = encoder.encode_all(&train_ex, dataset)?;
    let eval_set = encoder.encode_all(&eval_ex, dataset)?;

    let dims = match arch {
        Arch::Dnn1 => Dims::dnn1(config.hidden),
        Arch::Dnn2 => Dims::dnn2(config.hidden, encoder.categorical_dim()),
    };
    let mut model = Model::init(arch, dims, model_seed)?;
    let cfg = TrainConfig {
        seed: model_seed,
        ..config.clone()
    };
    train(&mut model, &train_set, &cfg)?;
    let scores = predict(&model, &eval_set)?;
    let labels: Vec<bool> = eval_set.iter().map(|e| e.label).collect();
    Ok((auc(&scores, &labels)?, model, encoder))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutResult {
    pub train_size: usize,
    pub test_size: usize,
    pub test_auc: f64,
}

/// 80/20-style holdout only: train on the training share, score the rest.
pub fn holdout_auc(dataset: &Dataset, config: &ExperimentConfig, scheme_index: u64) -> Result<HoldoutResult, EvalError> {
    let labels: Vec<bool> = dataset.examples.iter().map(|e| e.label).collect();
    let split = holdout_split(&labels, config.holdout_fraction, seed::derive(config.seed, &[scheme_index]))?;
    let (test_auc, _, _) = fit_and_score(
        dataset,
        &split.train,
        &split.test,
        config.arch,
        &config.attributes,
        &config.train,
        seed::derive(config.seed, &[seed::FINAL_MODEL, scheme_index]),
    )?;
    Ok(HoldoutResult {
        train_size: split.train.len(),
        test_size: split.test.len(),
        test_auc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub positives: usize,
    pub negatives: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub fold_aucs: Vec<f64>,
    pub cv_auc_mean: f64,
    pub test_auc: f64,
    pub counts: CountsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SchemeResult>,
}

/// Cross-validation on the training share plus a held-out test score, per
/// scheme. Fold models train in parallel; results are assembled in fold
/// order, so the report does not depend on scheduling.
pub fn run_scheme(dataset: &Dataset, counts: CountsReport, config: &ExperimentConfig, scheme_index: u64) -> Result<SchemeResult, EvalError> {
    let labels: Vec<bool> = dataset.examples.iter().map(|e| e.label).collect();
    let split = holdout_split(&labels, config.holdout_fraction, seed::derive(config.seed, &[scheme_index]))?;
    let train_labels: Vec<bool> = split.train.iter().map(|&i| labels[i]).collect();
    let folds = kfold(&train_labels, config.folds, seed::derive(config.seed, &[scheme_index]))?;

    let fold_aucs = (0..folds.len())
        .into_par_iter()
        .map(|f| {
            let eval_idx: Vec<usize> = folds[f].iter().map(|&i| split.train[i]).collect();
            let fit_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, fold)| fold.iter().map(|&i| split.train[i]))
                .collect();
            fit_and_score(
                dataset,
                &fit_idx,
                &eval_idx,
                config.arch,
                &config.attributes,
                &config.train,
                seed::derive(config.seed, &[seed::FOLD_MODEL, scheme_index, f as u64]),
            )
            .map(|(a, _, _)| a)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;

    let (test_auc, _, _) = fit_and_score(
        dataset,
        &split.train,
        &split.test,
        config.arch,
        &config.attributes,
        &config.train,
        seed::derive(config.seed, &[seed::FINAL_MODEL, scheme_index]),
    )?;

    Ok(SchemeResult {
        scheme: dataset.scheme,
        positives: dataset.positives(),
        negatives: dataset.negatives(),
        train_size: split.train.len(),
        test_size: split.test.len(),
        cv_auc_mean: fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64,
        fold_aucs,
        test_auc,
        counts,
    })
}

pub fn run_experiment(
    series: &BTreeMap<String, Vec<ValidSeries>>,
    meters: &BTreeMap<String, MeterRecord>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, EvalError> {
    if config.schemes.is_empty() {
        return Err(EvalError::Split("no schemes requested".into()));
    }
    let rows = config
        .schemes
        .iter()
        .enumerate()
        .map(|(i, &scheme)| {
            let (dataset, counts) = build_dataset(
                series,
                meters,
                LabelConfig {
                    scheme,
                    exclude_plateau_negatives: config.exclude_plateau_negatives,
                },
            )?;
            run_scheme(&dataset, counts, config, i as u64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        rows,
    })
}

/// Plain-text table with the columns `Readings | Cross-validation | Testing`.
pub fn render_table(report: &ExperimentReport) -> String {
    let title = match report.config.arch {
        Arch::Dnn1 => "DNN1, without categorical attributes",
        Arch::Dnn2 => "DNN2, with categorical attributes",
    };
    let mut out = String::new();
    let _ = writeln!(out, "Cross-validation and testing results (AUC), {title}");
    let _ = writeln!(out, "{:<10}  {:>16}  {:>8}", "Readings", "Cross-validation", "Testing");
    for row in &report.rows {
        let label = format!("{}P + {}", row.scheme.plateau, row.scheme.preceding);
        let _ = writeln!(
            out,
            "{:<10}  {:>15.1}%  {:>7.1}%",
            label,
            100.0 * row.cv_auc_mean,
            100.0 * row.test_auc
        );
    }
    out
}
