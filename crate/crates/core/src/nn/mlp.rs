use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::{Error, Result};

/// Dense feed-forward network: rectifier on hidden layers, raw logits out.
///
/// Layer `k` maps `dims[k]` inputs to `dims[k + 1]` outputs through a
/// `dims[k] x dims[k + 1]` weight matrix, so a batch `X` (rows = samples)
/// flows as `X · W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    dims: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Parameter-shaped buffer used for gradients and optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Activations kept from a forward pass so the backward pass can reuse them.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `activations[k]` is the input to layer `k`; the last entry is the logits.
    activations: Vec<Matrix>,
}

impl ForwardTrace {
    pub fn logits(&self) -> &Matrix {
        self.activations.last().expect("trace always holds the input")
    }

    pub fn into_logits(mut self) -> Matrix {
        self.activations.pop().expect("trace always holds the input")
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::config("a network needs at least input and output dims"));
    }
    if dims.contains(&0) {
        return Err(Error::config("layer widths must be positive"));
    }
    Ok(())
}

impl MlpModel {
    /// Glorot-uniform weights drawn from `seed`, zero biases.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        check_dims(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| (2.0 * rng.random::<f64>() - 1.0) * limit)
                .collect();
            weights.push(Matrix::from_vec(fan_in, fan_out, data)?);
        }
        let biases = dims[1..].iter().map(|&d| vec![0.0; d]).collect();
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
        })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            weights: dims.windows(2).map(|p| Matrix::zeros(p[0], p[1])).collect(),
            biases: dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
        })
    }

    pub fn from_parts(weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::shape("need one bias vector per weight matrix"));
        }
        let mut dims = vec![weights[0].rows()];
        for (k, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.rows() != *dims.last().unwrap() {
                return Err(Error::shape(format!(
                    "layer {k} expects {} inputs but previous layer emits {}",
                    w.rows(),
                    dims.last().unwrap()
                )));
            }
            if b.len() != w.cols() {
                return Err(Error::shape(format!("layer {k} bias length mismatch")));
            }
            dims.push(w.cols());
        }
        check_dims(&dims)?;
        Ok(Self {
            dims,
            weights,
            biases,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn n_params(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.as_slice().len() + b.len())
            .sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_params() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                values.len()
            )));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let n = w.as_slice().len();
            w.as_mut_slice().copy_from_slice(&values[at..at + n]);
            at += n;
            let nb = b.len();
            b.copy_from_slice(&values[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        Ok(self.forward_trace(batch)?.into_logits())
    }

    pub fn forward_trace(&self, batch: &Matrix) -> Result<ForwardTrace> {
        if batch.cols() != self.input_dim() {
            return Err(Error::shape(format!(
                "batch has {} features, model expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        let last = self.n_layers() - 1;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(batch.clone());
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[k].matmul(w)?;
            for r in 0..z.rows() {
                let row = z.row_mut(r);
                for (v, bias) in row.iter_mut().zip(b) {
                    *v += bias;
                    if k < last && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            activations.push(z);
        }
        Ok(ForwardTrace { activations })
    }

    pub fn predict(&self, batch: &Matrix) -> Result<Vec<usize>> {
        Ok(self.forward(batch)?.argmax_rows())
    }

    /// Gradients of a scalar loss given its gradient with respect to the logits.
    pub fn backward(&self, batch: &Matrix, logit_grad: &Matrix) -> Result<Gradients> {
        let trace = self.forward_trace(batch)?;
        self.backward_trace(&trace, logit_grad)
    }

    pub fn backward_trace(&self, trace: &ForwardTrace, logit_grad: &Matrix) -> Result<Gradients> {
        if logit_grad.shape() != trace.logits().shape() {
            return Err(Error::shape(format!(
                "logit gradient is {:?}, forward output is {:?}",
                logit_grad.shape(),
                trace.logits().shape()
            )));
        }
        let n_layers = self.n_layers();
        let mut grad_w = vec![Matrix::zeros(0, 0); n_layers];
        let mut grad_b = vec![Vec::new(); n_layers];
        let mut delta = logit_grad.clone();
        for k in (0..n_layers).rev() {
            let input = &trace.activations[k];
            grad_w[k] = input.t_matmul(&delta)?;
            let mut gb = vec![0.0; delta.cols()];
            for row in delta.iter_rows() {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            grad_b[k] = gb;
            if k > 0 {
                let mut upstream = delta.matmul_t(&self.weights[k])?;
                // rectifier mask: the stored activation is positive iff its pre-activation was
                for (u, a) in upstream.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if *a <= 0.0 {
                        *u = 0.0;
                    }
                }
                delta = upstream;
            }
        }
        Ok(Gradients {
            weights: grad_w,
            biases: grad_b,
        })
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Matrix], &mut [Vec<f64>]) {
        (&mut self.weights, &mut self.biases)
    }
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            weights: model
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: model.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Same ordering as [`MlpModel::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn matches_model(&self, model: &MlpModel) -> bool {
        self.weights.len() == model.n_layers()
            && self
                .weights
                .iter()
                .zip(model.weights())
                .all(|(g, w)| g.shape() == w.shape())
            && self
                .biases
                .iter()
                .zip(model.biases())
                .all(|(g, b)| g.len() == b.len())
    }
}
