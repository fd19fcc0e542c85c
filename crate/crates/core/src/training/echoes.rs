use super::vanilla::check_inputs;
use super::{epoch_batches, gather_labels, mean_of, weight_stats, EpochLog, EpochObserver};
use super::{EpochSnapshot, Learner, Method, TrainConfig, TrainResult};
use crate::data::TrainView;
use crate::weighting::{
    class_balance, class_errors, echo_update, invert, rescale_to_unit_mean, WeightVector,
};
use crate::Result;

/// Target-model weights derived from the biased weights: inverted, capped,
/// class-balanced and optionally rescaled to mean one.
pub fn debiased_weights(
    biased: &WeightVector,
    labels: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<WeightVector> {
    let balanced = class_balance(&invert(biased, config.inversion_cap)?, labels, n_classes)?;
    if config.rescale_debiased {
        rescale_to_unit_mean(&balanced)
    } else {
        Ok(balanced)
    }
}

/// Biased model alone, trained in the echo chamber. The result carries it
/// as both `biased_model` and `target_model`.
pub fn train_biased_echo(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    run(view, config, observer, false)
}

/// Joint training of the echo-chamber biased model (seed) and the target
/// model (seed + 1). The target model idles during the first epoch, when its
/// weights are still zero.
pub fn train_echoes(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    run(view, config, observer, true)
}

fn run(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
    joint: bool,
) -> Result<TrainResult> {
    check_inputs(&view, config)?;
    let n = view.len();
    let labels = view.targets();
    let mut biased = Learner::new(&view, config, config.seed)?;
    let mut target = if joint {
        Some(Learner::new(&view, config, config.seed.wrapping_add(1))?)
    } else {
        None
    };
    let mut w_b = WeightVector::ones(n);
    let mut w_d = WeightVector::zeros(n);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut log = EpochLog::new(epoch + 1);
        let mut loss_b = Vec::new();
        let mut loss_d = Vec::new();
        for batch in epoch_batches(n, config.batch_size, config.seed, epoch) {
            let x = view.features().select_rows(&batch);
            let y = gather_labels(labels, &batch);
            loss_b.push(biased.weighted_step(&x, &y, &w_b.gather(&batch), 1.0)?);
            if let Some(target) = target.as_mut() {
                let wd = w_d.gather(&batch);
                if config.lambda > 0.0 && wd.iter().any(|&v| v > 0.0) {
                    loss_d.push(target.weighted_step(&x, &y, &wd, config.lambda)?);
                }
            }
        }
        log.loss_biased = mean_of(&loss_b);
        log.loss_debiased = mean_of(&loss_d);

        let predictions = biased.model.predict(view.features())?;
        let report = class_errors(&predictions, labels, view.n_classes())?;
        w_b = echo_update(&w_b, &report, labels, config.alpha, config.t_error)?;
        if joint {
            w_d = debiased_weights(&w_b, labels, view.n_classes(), config)?;
        }
        weight_stats(&mut log, &w_b);

        let target_model = target.as_ref().map_or(&biased.model, |t| &t.model);
        observer.on_epoch(&EpochSnapshot {
            log: &log,
            target_model,
            biased_model: Some(&biased.model),
            biased_weights: Some(&w_b),
            debiased_weights: joint.then_some(&w_d),
        })?;
        history.push(log);
    }

    let (target_model, biased_model) = match target {
        Some(t) => (t.model, Some(biased.model)),
        None => (biased.model.clone(), Some(biased.model)),
    };
    Ok(TrainResult {
        method: Method::Echoes,
        target_model,
        biased_model,
        final_biased_weights: Some(w_b),
        final_debiased_weights: joint.then_some(w_d),
        error_set: None,
        history,
        warnings: Vec::new(),
    })
}
