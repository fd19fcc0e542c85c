use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Alignment, AlignmentPattern, GroupId};
use crate::nn::Matrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

/// Features, targets and the hidden per-sample bias attributes.
///
/// Bias attribute `k` is aligned with a sample when it equals the sample's
/// target class. Bias labels are only reachable through this type; trainers
/// that must stay unsupervised receive a [`TrainView`] instead.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    targets: Vec<usize>,
    /// Row-major `n x n_biases`.
    bias_labels: Vec<usize>,
    n_classes: usize,
    n_biases: usize,
    role: Role,
}

/// Features and targets only.
#[derive(Clone, Copy, Debug)]
pub struct TrainView<'a> {
    features: &'a Matrix,
    targets: &'a [usize],
    n_classes: usize,
}

impl<'a> TrainView<'a> {
    pub fn features(&self) -> &'a Matrix {
        self.features
    }

    pub fn targets(&self) -> &'a [usize] {
        self.targets
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        targets: Vec<usize>,
        bias_labels: Vec<usize>,
        n_classes: usize,
        n_biases: usize,
        role: Role,
    ) -> Result<Self> {
        let n = targets.len();
        if features.rows() != n {
            return Err(Error::shape(format!(
                "{} feature rows for {n} targets",
                features.rows()
            )));
        }
        if bias_labels.len() != n * n_biases {
            return Err(Error::shape(format!(
                "expected {} bias labels, got {}",
                n * n_biases,
                bias_labels.len()
            )));
        }
        if n_classes < 2 {
            return Err(Error::config("need at least two classes"));
        }
        if n_biases > 16 {
            return Err(Error::config("at most 16 bias attributes are supported"));
        }
        if targets.iter().chain(&bias_labels).any(|&v| v >= n_classes) {
            return Err(Error::input(format!("label outside 0..{n_classes}")));
        }
        if !features.is_finite() {
            return Err(Error::input("features must be finite"));
        }
        let ds = Self {
            features,
            targets,
            bias_labels,
            n_classes,
            n_biases,
            role,
        };
        if role == Role::Test && n_biases > 0 {
            let counts = ds.group_counts();
            if counts.iter().any(|&c| c != counts[0]) {
                return Err(Error::input(
                    "test datasets must hold equally many samples in every joint group",
                ));
            }
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_biases(&self) -> usize {
        self.n_biases
    }

    pub fn n_groups(&self) -> usize {
        self.n_classes << self.n_biases
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn view(&self) -> TrainView<'_> {
        TrainView {
            features: &self.features,
            targets: &self.targets,
            n_classes: self.n_classes,
        }
    }

    pub fn bias_labels(&self, i: usize) -> &[usize] {
        &self.bias_labels[i * self.n_biases..(i + 1) * self.n_biases]
    }

    pub fn alignment_of(&self, i: usize) -> AlignmentPattern {
        let y = self.targets[i];
        AlignmentPattern(
            self.bias_labels(i)
                .iter()
                .map(|&b| {
                    if b == y {
                        Alignment::Aligned
                    } else {
                        Alignment::Conflicting
                    }
                })
                .collect(),
        )
    }

    pub fn group_of(&self, i: usize) -> GroupId {
        GroupId {
            target: self.targets[i],
            alignment: self.alignment_of(i),
        }
    }

    /// Dense group index per sample, consistent with [`GroupId::index`].
    pub fn group_indices(&self) -> Vec<usize> {
        (0..self.len())
            .map(|i| {
                let y = self.targets[i];
                let mask: usize = self
                    .bias_labels(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b != y)
                    .map(|(k, _)| 1 << k)
                    .sum();
                (y << self.n_biases) + mask
            })
            .collect()
    }

    pub fn group_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_groups()];
        for g in self.group_indices() {
            counts[g] += 1;
        }
        counts
    }

    /// True when any bias attribute disagrees with the target.
    pub fn is_conflicting(&self, i: usize) -> bool {
        let y = self.targets[i];
        self.bias_labels(i).iter().any(|&b| b != y)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut bias = Vec::with_capacity(indices.len() * self.n_biases);
        for &i in indices {
            bias.extend_from_slice(self.bias_labels(i));
        }
        Self::new(
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.targets[i]).collect(),
            bias,
            self.n_classes,
            self.n_biases,
            self.role,
        )
    }

    /// Uniform subset of `floor(n · fraction)` rows without replacement,
    /// kept in original order.
    pub fn subsample(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::config(format!("fraction must lie in (0, 1], got {fraction}")));
        }
        let k = (self.len() as f64 * fraction).floor() as usize;
        if k == 0 {
            return Err(Error::config(format!(
                "fraction {fraction} of {} rows leaves no samples",
                self.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, self.len(), k).into_vec();
        idx.sort_unstable();
        self.select(&idx)
    }
}
