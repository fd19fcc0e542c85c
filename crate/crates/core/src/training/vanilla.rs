use super::{epoch_batches, gather_labels, mean_of, EpochLog, EpochObserver, EpochSnapshot};
use super::{Learner, Method, TrainConfig, TrainResult};
use crate::data::TrainView;
use crate::{Error, Result};

pub(crate) fn check_inputs(view: &TrainView<'_>, config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if view.is_empty() {
        return Err(Error::input("training dataset is empty"));
    }
    Ok(())
}

/// One pass of weighted mini-batch updates; returns the mean batch loss.
/// Batches whose weights are all zero are skipped.
pub(crate) fn fit_epoch(
    learner: &mut Learner,
    view: &TrainView<'_>,
    weights: &[f64],
    config: &TrainConfig,
    epoch: usize,
) -> Result<Option<f64>> {
    let mut losses = Vec::new();
    for batch in epoch_batches(view.len(), config.batch_size, config.seed, epoch) {
        let w: Vec<f64> = batch.iter().map(|&i| weights[i]).collect();
        if w.iter().all(|&v| v == 0.0) {
            continue;
        }
        let x = view.features().select_rows(&batch);
        let y = gather_labels(view.targets(), &batch);
        losses.push(learner.weighted_step(&x, &y, &w, 1.0)?);
    }
    Ok(mean_of(&losses))
}

/// Plain ERM: unweighted cross entropy for `config.epochs` epochs.
pub fn train_vanilla(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    check_inputs(&view, config)?;
    let mut learner = Learner::new(&view, config, config.seed)?;
    let ones = vec![1.0; view.len()];
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut log = EpochLog::new(epoch + 1);
        log.loss_debiased = fit_epoch(&mut learner, &view, &ones, config, epoch)?;
        observer.on_epoch(&EpochSnapshot {
            log: &log,
            target_model: &learner.model,
            biased_model: None,
            biased_weights: None,
            debiased_weights: None,
        })?;
        history.push(log);
    }
    Ok(TrainResult {
        method: Method::Vanilla,
        target_model: learner.model,
        biased_model: None,
        final_biased_weights: None,
        final_debiased_weights: None,
        error_set: None,
        history,
        warnings: Vec::new(),
    })
}
