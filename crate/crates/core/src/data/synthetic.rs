use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Role};
use crate::nn::Matrix;
use crate::{Error, Result};

/// Parameters of the synthetic generator.
///
/// Each sample carries one feature block for the target class, one block
/// per bias attribute and a block of pure noise. Block means sit at
/// `±sep / 2` per coordinate and every coordinate gets Gaussian noise of
/// scale `noise_sigma`; bias blocks are easier because `bias_sep >
/// target_sep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub n_classes: usize,
    pub n_biases: usize,
    /// Probability that bias `k` equals the target class in the train split.
    pub skew: Vec<f64>,
    pub target_sep: f64,
    pub bias_sep: Vec<f64>,
    pub block_dim: usize,
    pub noise_dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_train: 8000,
            n_test: 1000,
            n_classes: 2,
            n_biases: 2,
            skew: vec![0.95, 0.95],
            target_sep: 0.75,
            bias_sep: vec![2.0, 2.0],
            block_dim: 8,
            noise_dim: 4,
            noise_sigma: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn n_features(&self) -> usize {
        (1 + self.n_biases) * self.block_dim + self.noise_dim
    }

    pub fn n_groups(&self) -> usize {
        self.n_classes << self.n_biases
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.n_biases;
        if self.n_classes < 2 {
            return Err(Error::config("n_classes must be at least 2"));
        }
        if k == 0 || k > 16 {
            return Err(Error::config("n_biases must lie in 1..=16"));
        }
        if self.skew.len() != k || self.bias_sep.len() != k {
            return Err(Error::config(format!(
                "skew and bias_sep need exactly {k} entries"
            )));
        }
        if let Some(s) = self.skew.iter().find(|&&s| !(s > 0.5 && s <= 1.0)) {
            return Err(Error::config(format!("skew {s} outside (0.5, 1]")));
        }
        if !(self.target_sep.is_finite() && self.target_sep > 0.0) {
            return Err(Error::config("target_sep must be positive"));
        }
        if let Some(b) = self
            .bias_sep
            .iter()
            .find(|&&b| !(b.is_finite() && b > self.target_sep))
        {
            return Err(Error::config(format!(
                "bias_sep {b} must exceed target_sep {}",
                self.target_sep
            )));
        }
        if self.block_dim == 0 {
            return Err(Error::config("block_dim must be positive"));
        }
        if self.n_classes > 2 && self.block_dim < self.n_classes {
            return Err(Error::config("block_dim must be at least n_classes when C > 2"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return Err(Error::config("noise_sigma must be positive"));
        }
        if self.n_train == 0 {
            return Err(Error::config("n_train must be positive"));
        }
        if self.n_test == 0 || !self.n_test.is_multiple_of(self.n_groups()) {
            return Err(Error::config(format!(
                "n_test = {} must be a positive multiple of C * 2^K = {}",
                self.n_test,
                self.n_groups()
            )));
        }
        Ok(())
    }
}

/// Sign of coordinate `j` of the class-`c` block mean. Two classes sit on
/// opposite corners; more classes use one-vs-rest codes cycling over the
/// coordinates.
fn mean_sign(class: usize, n_classes: usize, j: usize) -> f64 {
    if n_classes == 2 {
        if class == 1 {
            1.0
        } else {
            -1.0
        }
    } else if j % n_classes == class {
        1.0
    } else {
        -1.0
    }
}

fn other_class(rng: &mut ChaCha8Rng, y: usize, n_classes: usize) -> usize {
    let r = rng.random_range(0..n_classes - 1);
    if r < y {
        r
    } else {
        r + 1
    }
}

fn write_features(
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
    y: usize,
    biases: &[usize],
    out: &mut Vec<f64>,
) {
    let d = spec.block_dim;
    let c = spec.n_classes;
    let sigma = spec.noise_sigma;
    let mut push_block = |rng: &mut ChaCha8Rng, class: usize, sep: f64| {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            out.push(mean_sign(class, c, j) * sep / 2.0 + sigma * z);
        }
    };
    push_block(rng, y, spec.target_sep);
    for (k, &b) in biases.iter().enumerate() {
        push_block(rng, b, spec.bias_sep[k]);
    }
    for _ in 0..spec.noise_dim {
        let z: f64 = rng.sample(StandardNormal);
        out.push(sigma * z);
    }
}

/// Draws the train split (skewed) and the test split (exactly balanced over
/// the `C · 2^K` joint groups). Fully determined by `spec.seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let c = spec.n_classes;
    let k = spec.n_biases;
    let d = spec.n_features();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    let mut feats = Vec::with_capacity(spec.n_train * d);
    let mut targets = Vec::with_capacity(spec.n_train);
    let mut bias = Vec::with_capacity(spec.n_train * k);
    let mut row_bias = vec![0; k];
    for _ in 0..spec.n_train {
        let y = rng.random_range(0..c);
        for (b, &skew) in row_bias.iter_mut().zip(&spec.skew) {
            *b = if rng.random::<f64>() < skew {
                y
            } else {
                other_class(&mut rng, y, c)
            };
        }
        write_features(spec, &mut rng, y, &row_bias, &mut feats);
        targets.push(y);
        bias.extend_from_slice(&row_bias);
    }
    let train = LabeledDataset::new(
        Matrix::from_vec(spec.n_train, d, feats)?,
        targets,
        bias,
        c,
        k,
        Role::Train,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let per_group = spec.n_test / spec.n_groups();
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::with_capacity(spec.n_test);
    for y in 0..c {
        for mask in 0..1usize << k {
            for _ in 0..per_group {
                let b: Vec<usize> = (0..k)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            other_class(&mut rng, y, c)
                        } else {
                            y
                        }
                    })
                    .collect();
                rows.push((y, b));
            }
        }
    }
    rows.shuffle(&mut rng);
    let mut feats = Vec::with_capacity(spec.n_test * d);
    let mut targets = Vec::with_capacity(spec.n_test);
    let mut bias = Vec::with_capacity(spec.n_test * k);
    for (y, b) in &rows {
        write_features(spec, &mut rng, *y, b, &mut feats);
        targets.push(*y);
        bias.extend_from_slice(b);
    }
    let test = LabeledDataset::new(
        Matrix::from_vec(spec.n_test, d, feats)?,
        targets,
        bias,
        c,
        k,
        Role::Test,
    )?;
    Ok((train, test))
}
