//! Trainers: Echoes (echo-chamber biased model plus inverse-weighted target
//! model) and the baselines ERM, LfF, JTT and GroupDRO.
//!
//! Every trainer except GroupDRO receives a [`TrainView`], which carries
//! features and targets only. Per-epoch state is pushed to an
//! [`EpochObserver`] so evaluation code holding the bias labels can build
//! group-level curves without the trainer ever seeing them.

mod batching;
mod config;
mod echoes;
mod groupdro;
mod jtt;
mod lff;
mod vanilla;

use crate::data::{LabeledDataset, TrainView};
use crate::nn::{weighted_cross_entropy, Adam, AdamConfig, Matrix, MlpModel};
use crate::weighting::WeightVector;
use crate::Result;

pub use batching::{epoch_batches, gather_labels};
pub use config::{Method, TrainConfig};
pub use echoes::{debiased_weights, train_biased_echo, train_echoes};
pub use groupdro::{train_groupdro, update_group_weights};
pub use jtt::train_jtt;
pub use lff::{lff_batch_weights, train_lff};
pub use vanilla::train_vanilla;

/// Scalar summary of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    /// Mean batch loss of the biased / auxiliary model, if any.
    pub loss_biased: Option<f64>,
    /// Mean batch loss of the target model; `None` while it is idle.
    pub loss_debiased: Option<f64>,
    pub mean_biased_weight: Option<f64>,
    pub min_biased_weight: Option<f64>,
    /// GroupDRO mixture over joint groups.
    pub group_weights: Option<Vec<f64>>,
}

impl EpochLog {
    fn new(epoch: usize) -> Self {
        Self {
            epoch,
            loss_biased: None,
            loss_debiased: None,
            mean_biased_weight: None,
            min_biased_weight: None,
            group_weights: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.loss_biased,
            self.loss_debiased,
            self.mean_biased_weight,
            self.min_biased_weight,
        ]
        .iter()
        .flatten()
        .all(|v| v.is_finite())
            && self.group_weights.iter().flatten().all(|v| v.is_finite())
    }
}

/// State visible to observers at the end of each epoch.
pub struct EpochSnapshot<'a> {
    pub log: &'a EpochLog,
    pub target_model: &'a MlpModel,
    pub biased_model: Option<&'a MlpModel>,
    pub biased_weights: Option<&'a WeightVector>,
    pub debiased_weights: Option<&'a WeightVector>,
}

pub trait EpochObserver {
    fn on_epoch(&mut self, snapshot: &EpochSnapshot<'_>) -> Result<()>;
}

impl EpochObserver for () {
    fn on_epoch(&mut self, _: &EpochSnapshot<'_>) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub method: Method,
    pub target_model: MlpModel,
    pub biased_model: Option<MlpModel>,
    pub final_biased_weights: Option<WeightVector>,
    pub final_debiased_weights: Option<WeightVector>,
    /// JTT error set (indices into the training data).
    pub error_set: Option<Vec<usize>>,
    pub history: Vec<EpochLog>,
    pub warnings: Vec<String>,
}

/// Runs `config.method` on `dataset`. Only GroupDRO gets the bias labels.
pub fn train(
    dataset: &LabeledDataset,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    match config.method {
        Method::Vanilla => train_vanilla(dataset.view(), config, observer),
        Method::Echoes => train_echoes(dataset.view(), config, observer),
        Method::Lff => train_lff(dataset.view(), config, observer),
        Method::Jtt => train_jtt(dataset.view(), config, observer),
        Method::GroupDro => train_groupdro(dataset, config, observer),
    }
}

/// A model with its optimizer.
#[derive(Clone, Debug)]
pub(crate) struct Learner {
    pub model: MlpModel,
    pub opt: Adam,
}

impl Learner {
    pub fn new(view: &TrainView<'_>, config: &TrainConfig, seed: u64) -> Result<Self> {
        let dims = config.layer_dims(view.features().cols(), view.n_classes());
        let model = MlpModel::new(&dims, seed)?;
        let opt = Adam::new(
            &model,
            AdamConfig {
                lr: config.lr,
                ..AdamConfig::default()
            },
        );
        Ok(Self { model, opt })
    }

    /// One Adam step on the weighted-mean cross entropy, gradient scaled by
    /// `scale`. Returns the (unscaled) batch loss.
    pub fn weighted_step(
        &mut self,
        x: &Matrix,
        y: &[usize],
        weights: &[f64],
        scale: f64,
    ) -> Result<f64> {
        let trace = self.model.forward_trace(x)?;
        let mut loss = weighted_cross_entropy(trace.logits(), y, weights)?;
        if scale != 1.0 {
            loss.logit_grad.scale(scale);
        }
        let grads = self.model.backward_trace(&trace, &loss.logit_grad)?;
        self.opt.step(&mut self.model, &grads)?;
        Ok(loss.total)
    }
}

pub(crate) fn mean_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub(crate) fn weight_stats(log: &mut EpochLog, w: &WeightVector) {
    log.mean_biased_weight = Some(w.mean());
    log.min_biased_weight = w.weights.iter().copied().reduce(f64::min);
}
