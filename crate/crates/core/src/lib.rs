//! Water-meter failure prediction at desk scale.
//!
//! The pipeline runs from raw reading exports to AUC reports:
//!
//! - [`ingest`] parses reading and meter CSV files,
//! - [`validate`] applies the validity rules and cuts histories at long gaps,
//! - [`label`] finds plateaus and builds `pP+k` training windows,
//! - [`features`] turns windows into scaled step features and one-hot vectors,
//! - [`neuralcore`] and [`models`] hold the GRU classifiers and their training,
//! - [`evaluate`] computes ROC/AUC and runs holdout plus k-fold experiments,
//! - [`synth`] generates fleets with known ground truth.

pub mod cli;
pub mod evaluate;
pub mod features;
pub mod ingest;
pub mod label;
pub mod models;
pub mod neuralcore;
pub mod seed;
pub mod synth;
pub mod validate;
