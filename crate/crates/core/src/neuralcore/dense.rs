use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{glorot_uniform, Activation, NeuralError, Parameters, Tensor2};

/// Fully connected layer `y = act(W x + b)` with `W` of shape `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor2,
    pub bias: Tensor2,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub pre: Vec<f64>,
    pub output: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn init<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        Self {
            weight: glorot_uniform(outputs, inputs, inputs, outputs, rng),
            bias: Tensor2::zeros(1, outputs),
            activation,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weight: Tensor2::zeros(self.weight.rows(), self.weight.cols()),
            bias: Tensor2::zeros(1, self.bias.cols()),
            activation: self.activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<DenseCache, NeuralError> {
        dense_forward(&self.weight, &self.bias, x, self.activation).map(|(_, c)| c)
    }

    pub fn backward_into(&self, cache: &DenseCache, dy: &[f64], grads: &mut Dense) -> Result<Vec<f64>, NeuralError> {
        dense_backward_into(&self.weight, cache, dy, &mut grads.weight, &mut grads.bias)
    }
}

impl Parameters for Dense {
    fn blocks(&self) -> Vec<(String, &Tensor2)> {
        vec![("weight".into(), &self.weight), ("bias".into(), &self.bias)]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Tensor2)> {
        vec![("weight".into(), &mut self.weight), ("bias".into(), &mut self.bias)]
    }
}

pub fn dense_forward(
    w: &Tensor2,
    b: &Tensor2,
    x: &[f64],
    activation: Activation,
) -> Result<(Vec<f64>, DenseCache), NeuralError> {
    if x.len() != w.cols() {
        return Err(NeuralError::Shape {
            context: "dense input",
            expected: (w.cols(), 1),
            found: (x.len(), 1),
        });
    }
    b.expect_shape("dense bias", 1, w.rows())?;
    let mut pre = w.matvec(x);
    for (s, bi) in pre.iter_mut().zip(b.as_slice()) {
        *s += bi;
    }
    let output: Vec<f64> = pre.iter().map(|&s| activation.apply(s)).collect();
    let cache = DenseCache {
        input: x.to_vec(),
        pre,
        output: output.clone(),
        activation,
    };
    Ok((output, cache))
}

/// Accumulates `dW` and `db` into the given tensors and returns `dx`.
pub fn dense_backward_into(
    w: &Tensor2,
    cache: &DenseCache,
    dy: &[f64],
    dw: &mut Tensor2,
    db: &mut Tensor2,
) -> Result<Vec<f64>, NeuralError> {
    if cache.input.len() != w.cols() || cache.pre.len() != w.rows() {
        return Err(NeuralError::StaleCache("dense cache dimensions"));
    }
    if dy.len() != w.rows() {
        return Err(NeuralError::Shape {
            context: "dense upstream gradient",
            expected: (w.rows(), 1),
            found: (dy.len(), 1),
        });
    }
    dw.expect_shape("dense weight gradient", w.rows(), w.cols())?;
    db.expect_shape("dense bias gradient", 1, w.rows())?;
    let ds: Vec<f64> = dy
        .iter()
        .zip(cache.pre.iter().zip(&cache.output))
        .map(|(g, (&s, &y))| g * cache.activation.derivative(s, y))
        .collect();
    dw.add_outer(&ds, &cache.input);
    db.add_row(&ds);
    let mut dx = vec![0.0; w.cols()];
    w.vecmat_add(&ds, &mut dx);
    Ok(dx)
}

/// Returns fresh `(dW, db, dx)`.
pub fn dense_backward(w: &Tensor2, cache: &DenseCache, dy: &[f64]) -> Result<(Tensor2, Tensor2, Vec<f64>), NeuralError> {
    let mut dw = Tensor2::zeros(w.rows(), w.cols());
    let mut db = Tensor2::zeros(1, w.rows());
    let dx = dense_backward_into(w, cache, dy, &mut dw, &mut db)?;
    Ok((dw, db, dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_through() {
        let w = Tensor2::identity(3);
        let b = Tensor2::zeros(1, 3);
        let (y, _) = dense_forward(&w, &b, &[1.5, -2.0, 0.25], Activation::Identity).unwrap();
        assert_eq!(y, vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn relu_layer_clips() {
        let w = Tensor2::identity(3);
        let b = Tensor2::zeros(1, 3);
        let (y, _) = dense_forward(&w, &b, &[-1.0, 0.0, 2.0], Activation::Relu).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn shape_mismatch() {
        let w = Tensor2::zeros(2, 3);
        let b = Tensor2::zeros(1, 2);
        assert!(matches!(
            dense_forward(&w, &b, &[1.0, 2.0], Activation::Relu),
            Err(NeuralError::Shape { .. })
        ));
        let (_, cache) = dense_forward(&w, &b, &[1.0, 2.0, 3.0], Activation::Relu).unwrap();
        assert!(dense_backward(&w, &cache, &[1.0]).is_err());
        let other = Tensor2::zeros(4, 3);
        assert_eq!(
            dense_backward(&other, &cache, &[1.0; 4]).unwrap_err(),
            NeuralError::StaleCache("dense cache dimensions")
        );
    }

    /// Central differences on `L = sum(c_i y_i)` for a random layer, skipping
    /// relu units whose pre-activation sits within 1e-3 of the kink.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for act in [Activation::Relu, Activation::Sigmoid, Activation::Tanh, Activation::Identity] {
            let layer = Dense::init(5, 4, act, &mut rng);
            let mut layer = layer;
            for b in layer.bias.as_mut_slice() {
                *b = rng.random_range(-0.5..0.5);
            }
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let loss = |l: &Dense, x: &[f64]| -> f64 {
                let (y, _) = dense_forward(&l.weight, &l.bias, x, l.activation).unwrap();
                y.iter().zip(&c).map(|(a, b)| a * b).sum()
            };
            let (_, cache) = dense_forward(&layer.weight, &layer.bias, &x, act).unwrap();
            let near_kink: Vec<bool> = cache
                .pre
                .iter()
                .map(|s| act == Activation::Relu && s.abs() < 1e-3)
                .collect();
            let (dw, db, dx) = dense_backward(&layer.weight, &cache, &c).unwrap();

            let h = 1e-5;
            let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
            for i in 0..4 {
                if near_kink[i] {
                    continue;
                }
                for j in 0..5 {
                    let mut p = layer.clone();
                    p.weight.as_mut_slice()[i * 5 + j] += h;
                    let mut m = layer.clone();
                    m.weight.as_mut_slice()[i * 5 + j] -= h;
                    let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
                    assert!(rel(dw.get(i, j), fd) < 1e-6, "{act:?} dW[{i},{j}]");
                }
                let mut p = layer.clone();
                p.bias.as_mut_slice()[i] += h;
                let mut m = layer.clone();
                m.bias.as_mut_slice()[i] -= h;
                let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * h);
                assert!(rel(db.get(0, i), fd) < 1e-6, "{act:?} db[{i}]");
            }
            if !near_kink.iter().any(|&k| k) {
                for j in 0..5 {
                    let mut xp = x.clone();
                    xp[j] += h;
                    let mut xm = x.clone();
                    xm[j] -= h;
                    let fd = (loss(&layer, &xp) - loss(&layer, &xm)) / (2.0 * h);
                    assert!(rel(dx[j], fd) < 1e-6, "{act:?} dx[{j}]");
                }
            }
        }
    }
}
