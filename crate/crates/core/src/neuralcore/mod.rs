//! Small numerical kernel: dense layers, a GRU cell, binary cross-entropy
//! and Adam, with hand-written reverse-mode gradients.
//!
//! Everything is `f64`. Networks here are tiny, and the gradient checks in
//! the test suite rely on the extra precision.

mod adam;
mod dense;
mod gru;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{dense_backward, dense_backward_into, dense_forward, Dense, DenseCache};
pub use gru::{gru_backward, gru_backward_into, gru_forward, GruCache, GruInputGrads, GruParams};
pub use tensor::Tensor2;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    Shape {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("non-finite gradient in parameter block `{0}`")]
    NonFiniteGradient(String),
    #[error("label must be 0 or 1, got {0}")]
    Label(f64),
    #[error("cache does not match parameters: {0}")]
    StaleCache(&'static str),
    #[error("empty input sequence")]
    EmptySequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            Activation::Relu => relu(s),
            Activation::Sigmoid => sigmoid(s),
            Activation::Tanh => s.tanh(),
            Activation::Identity => s,
        }
    }

    /// Derivative expressed through the pre-activation `s` and output `y`.
    /// The relu derivative at exactly zero is taken as zero.
    pub fn derivative(self, s: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if s > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

pub fn relu(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        0.0
    }
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

pub const PROB_CLAMP: f64 = 1e-12;

/// Binary cross-entropy of a sigmoid output `p` against `y` in {0, 1}.
///
/// Returns the loss (with `p` clamped to `[1e-12, 1 - 1e-12]`) and its
/// gradient with respect to the logit, `p - y`.
pub fn bce_loss(p: f64, y: f64) -> Result<(f64, f64), NeuralError> {
    if y != 0.0 && y != 1.0 {
        return Err(NeuralError::Label(y));
    }
    let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let loss = -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
    Ok((loss, p - y))
}

/// Named views over every trainable block, in a fixed order.
///
/// Gradients are stored in a value of the same type, so parameters and
/// gradients line up block for block.
pub trait Parameters {
    fn blocks(&self) -> Vec<(String, &Tensor2)>;
    fn blocks_mut(&mut self) -> Vec<(String, &mut Tensor2)>;

    fn param_count(&self) -> usize {
        self.blocks().iter().map(|(_, t)| t.len()).sum()
    }

    fn zero_grad(&mut self) {
        for (_, t) in self.blocks_mut() {
            t.fill(0.0);
        }
    }
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng>(rows: usize, cols: usize, fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor2 {
    let limit = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..=limit)).collect();
    Tensor2::new(rows, cols, data).expect("sized above")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_definition() {
        let v: Vec<f64> = [-1.0, 0.0, 2.0].iter().map(|&s| relu(s)).collect();
        assert_eq!(v, vec![0.0, 0.0, 2.0]);
        assert_eq!(Activation::Relu.derivative(0.0, 0.0), 0.0);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn bce_values() {
        let (loss, g) = bce_loss(0.5, 1.0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g, -0.5);
        let (loss, _) = bce_loss(1.0 - 1e-15, 1.0).unwrap();
        assert!(loss < 1e-11);
        let (loss, _) = bce_loss(1.0, 0.0).unwrap();
        assert!(loss.is_finite());
        assert_eq!(bce_loss(0.3, 0.5), Err(NeuralError::Label(0.5)));
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let f = |logit: f64, y: f64| bce_loss(sigmoid(logit), y).unwrap().0;
        let h = 1e-5;
        for &logit in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            for &y in &[0.0, 1.0] {
                let (_, g) = bce_loss(sigmoid(logit), y).unwrap();
                let fd = (f(logit + h, y) - f(logit - h, y)) / (2.0 * h);
                assert!((g - fd).abs() < 1e-8, "logit {logit} y {y}: {g} vs {fd}");
            }
        }
    }
}
