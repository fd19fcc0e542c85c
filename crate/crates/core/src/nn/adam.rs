use serde::{Deserialize, Serialize};

use super::{Gradients, MlpModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected Adam with per-parameter moment buffers.
#[derive(Clone, Debug)]
pub struct Adam {
    config: AdamConfig,
    first: Gradients,
    second: Gradients,
    step: u64,
}

impl Adam {
    pub fn new(model: &MlpModel, config: AdamConfig) -> Self {
        Self {
            config,
            first: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
            step: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients) -> Result<()> {
        if !grads.matches_model(model) || !self.first.matches_model(model) {
            return Err(Error::shape("gradient shapes do not match the model"));
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);

        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };

        let (weights, biases) = model.params_mut();
        for k in 0..weights.len() {
            update(
                weights[k].as_mut_slice(),
                grads.weights[k].as_slice(),
                self.first.weights[k].as_mut_slice(),
                self.second.weights[k].as_mut_slice(),
            );
            update(
                &mut biases[k],
                &grads.biases[k],
                &mut self.first.biases[k],
                &mut self.second.biases[k],
            );
        }
        Ok(())
    }
}
