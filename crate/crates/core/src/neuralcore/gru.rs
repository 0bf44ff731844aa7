//! Gated recurrent unit in the original Cho et al. form:
//!
//! ```text
//! z_t = σ(x_t W_z + h_{t-1} U_z + b_z)
//! r_t = σ(x_t W_r + h_{t-1} U_r + b_r)
//! n_t = tanh(x_t W_n + (r_t ⊙ h_{t-1}) U_n + b_n)
//! h_t = z_t ⊙ h_{t-1} + (1 - z_t) ⊙ n_t
//! ```
//!
//! Inputs and states are row vectors; `W_*` are `input_dim x hidden` and
//! `U_*` are `hidden x hidden`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{glorot_uniform, sigmoid, NeuralError, Parameters, Tensor2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub w_update: Tensor2,
    pub u_update: Tensor2,
    pub b_update: Tensor2,
    pub w_reset: Tensor2,
    pub u_reset: Tensor2,
    pub b_reset: Tensor2,
    pub w_candidate: Tensor2,
    pub u_candidate: Tensor2,
    pub b_candidate: Tensor2,
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct GruCache {
    input_dim: usize,
    hidden: usize,
    xs: Tensor2,
    /// `hs[0]` is `h0`; `hs[t + 1]` is the state after step `t`.
    hs: Vec<Vec<f64>>,
    zs: Vec<Vec<f64>>,
    rs: Vec<Vec<f64>>,
    ns: Vec<Vec<f64>>,
}

impl GruCache {
    pub fn final_state(&self) -> &[f64] {
        self.hs.last().expect("cache always holds h0")
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.hs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruInputGrads {
    /// `T x input_dim`.
    pub dx: Tensor2,
    pub dh0: Vec<f64>,
}

impl GruParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            w_update: Tensor2::zeros(input_dim, hidden),
            u_update: Tensor2::zeros(hidden, hidden),
            b_update: Tensor2::zeros(1, hidden),
            w_reset: Tensor2::zeros(input_dim, hidden),
            u_reset: Tensor2::zeros(hidden, hidden),
            b_reset: Tensor2::zeros(1, hidden),
            w_candidate: Tensor2::zeros(input_dim, hidden),
            u_candidate: Tensor2::zeros(hidden, hidden),
            b_candidate: Tensor2::zeros(1, hidden),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden);
        for (w, u) in [
            (&mut p.w_update, &mut p.u_update),
            (&mut p.w_reset, &mut p.u_reset),
            (&mut p.w_candidate, &mut p.u_candidate),
        ] {
            *w = glorot_uniform(input_dim, hidden, input_dim, hidden, rng);
            *u = glorot_uniform(hidden, hidden, hidden, hidden, rng);
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w_update.rows()
    }

    pub fn hidden(&self) -> usize {
        self.u_update.rows()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let (i, h) = (self.input_dim(), self.hidden());
        for w in [&self.w_update, &self.w_reset, &self.w_candidate] {
            w.expect_shape("gru input weights", i, h)?;
        }
        for u in [&self.u_update, &self.u_reset, &self.u_candidate] {
            u.expect_shape("gru recurrent weights", h, h)?;
        }
        for b in [&self.b_update, &self.b_reset, &self.b_candidate] {
            b.expect_shape("gru bias", 1, h)?;
        }
        Ok(())
    }
}

impl Parameters for GruParams {
    fn blocks(&self) -> Vec<(String, &Tensor2)> {
        vec![
            ("w_update".into(), &self.w_update),
            ("u_update".into(), &self.u_update),
            ("b_update".into(), &self.b_update),
            ("w_reset".into(), &self.w_reset),
            ("u_reset".into(), &self.u_reset),
            ("b_reset".into(), &self.b_reset),
            ("w_candidate".into(), &self.w_candidate),
            ("u_candidate".into(), &self.u_candidate),
            ("b_candidate".into(), &self.b_candidate),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Tensor2)> {
        vec![
            ("w_update".into(), &mut self.w_update),
            ("u_update".into(), &mut self.u_update),
            ("b_update".into(), &mut self.b_update),
            ("w_reset".into(), &mut self.w_reset),
            ("u_reset".into(), &mut self.u_reset),
            ("b_reset".into(), &mut self.b_reset),
            ("w_candidate".into(), &mut self.w_candidate),
            ("u_candidate".into(), &mut self.u_candidate),
            ("b_candidate".into(), &mut self.b_candidate),
        ]
    }
}

/// Runs the cell over `x_seq` (`T x input_dim`, one row per step) from `h0`.
pub fn gru_forward(params: &GruParams, x_seq: &Tensor2, h0: &[f64]) -> Result<GruCache, NeuralError> {
    params.validate()?;
    let (input_dim, hidden) = (params.input_dim(), params.hidden());
    if x_seq.rows() == 0 {
        return Err(NeuralError::EmptySequence);
    }
    x_seq.expect_shape("gru input sequence", x_seq.rows(), input_dim)?;
    if h0.len() != hidden {
        return Err(NeuralError::Shape {
            context: "gru initial state",
            expected: (1, hidden),
            found: (1, h0.len()),
        });
    }

    let steps = x_seq.rows();
    let mut hs = Vec::with_capacity(steps + 1);
    let mut zs = Vec::with_capacity(steps);
    let mut rs = Vec::with_capacity(steps);
    let mut ns = Vec::with_capacity(steps);
    hs.push(h0.to_vec());

    for t in 0..steps {
        let x = x_seq.row(t);
        let h = &hs[t];

        let mut az = params.b_update.as_slice().to_vec();
        params.w_update.vecmat_add(x, &mut az);
        params.u_update.vecmat_add(h, &mut az);
        let z: Vec<f64> = az.into_iter().map(sigmoid).collect();

        let mut ar = params.b_reset.as_slice().to_vec();
        params.w_reset.vecmat_add(x, &mut ar);
        params.u_reset.vecmat_add(h, &mut ar);
        let r: Vec<f64> = ar.into_iter().map(sigmoid).collect();

        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        let mut an = params.b_candidate.as_slice().to_vec();
        params.w_candidate.vecmat_add(x, &mut an);
        params.u_candidate.vecmat_add(&rh, &mut an);
        let n: Vec<f64> = an.into_iter().map(f64::tanh).collect();

        let h_next: Vec<f64> = (0..hidden).map(|j| z[j] * h[j] + (1.0 - z[j]) * n[j]).collect();
        zs.push(z);
        rs.push(r);
        ns.push(n);
        hs.push(h_next);
    }

    Ok(GruCache {
        input_dim,
        hidden,
        xs: x_seq.clone(),
        hs,
        zs,
        rs,
        ns,
    })
}

/// Backpropagation through time. Parameter gradients are accumulated into
/// `grads`; input and initial-state gradients are returned.
pub fn gru_backward_into(
    params: &GruParams,
    cache: &GruCache,
    dh_final: &[f64],
    grads: &mut GruParams,
) -> Result<GruInputGrads, NeuralError> {
    let (input_dim, hidden) = (params.input_dim(), params.hidden());
    if cache.input_dim != input_dim || cache.hidden != hidden {
        return Err(NeuralError::StaleCache("gru cache dimensions differ from parameters"));
    }
    if dh_final.len() != hidden {
        return Err(NeuralError::Shape {
            context: "gru upstream gradient",
            expected: (1, hidden),
            found: (1, dh_final.len()),
        });
    }
    if grads.input_dim() != input_dim || grads.hidden() != hidden {
        return Err(NeuralError::Shape {
            context: "gru gradient buffer",
            expected: (input_dim, hidden),
            found: (grads.input_dim(), grads.hidden()),
        });
    }

    let steps = cache.xs.rows();
    let mut dx = Tensor2::zeros(steps, input_dim);
    let mut dh = dh_final.to_vec();

    for t in (0..steps).rev() {
        let x = cache.xs.row(t);
        let h = &cache.hs[t];
        let (z, r, n) = (&cache.zs[t], &cache.rs[t], &cache.ns[t]);

        let mut dh_prev: Vec<f64> = (0..hidden).map(|j| dh[j] * z[j]).collect();
        let da_n: Vec<f64> = (0..hidden).map(|j| dh[j] * (1.0 - z[j]) * (1.0 - n[j] * n[j])).collect();
        let da_z: Vec<f64> = (0..hidden).map(|j| dh[j] * (h[j] - n[j]) * z[j] * (1.0 - z[j])).collect();

        let rh: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        grads.w_candidate.add_outer(x, &da_n);
        grads.u_candidate.add_outer(&rh, &da_n);
        grads.b_candidate.add_row(&da_n);
        let d_rh = params.u_candidate.matvec(&da_n);

        let da_r: Vec<f64> = (0..hidden).map(|j| d_rh[j] * h[j] * r[j] * (1.0 - r[j])).collect();
        for j in 0..hidden {
            dh_prev[j] += d_rh[j] * r[j];
        }

        grads.w_update.add_outer(x, &da_z);
        grads.u_update.add_outer(h, &da_z);
        grads.b_update.add_row(&da_z);
        grads.w_reset.add_outer(x, &da_r);
        grads.u_reset.add_outer(h, &da_r);
        grads.b_reset.add_row(&da_r);

        for (u, da) in [(&params.u_update, &da_z), (&params.u_reset, &da_r)] {
            for (d, v) in dh_prev.iter_mut().zip(u.matvec(da)) {
                *d += v;
            }
        }

        let dx_row = &mut dx.as_mut_slice()[t * input_dim..(t + 1) * input_dim];
        for (w, da) in [
            (&params.w_update, &da_z),
            (&params.w_reset, &da_r),
            (&params.w_candidate, &da_n),
        ] {
            for (d, v) in dx_row.iter_mut().zip(w.matvec(da)) {
                *d += v;
            }
        }
        dh = dh_prev;
    }

    Ok(GruInputGrads { dx, dh0: dh })
}

pub fn gru_backward(
    params: &GruParams,
    cache: &GruCache,
    dh_final: &[f64],
) -> Result<(GruParams, GruInputGrads), NeuralError> {
    let mut grads = GruParams::zeros(params.input_dim(), params.hidden());
    let inputs = gru_backward_into(params, cache, dh_final, &mut grads)?;
    Ok((grads, inputs))
}
