use super::vanilla::{check_inputs, fit_epoch};
use super::{EpochLog, EpochObserver, EpochSnapshot, Learner, Method, TrainConfig, TrainResult};
use crate::data::TrainView;
use crate::weighting::WeightVector;
use crate::{Error, Result};

/// Just-train-twice: ERM for `jtt_first_stage_epochs`, collect the training
/// samples that model gets wrong, then train a fresh model (seed + 1) for
/// the remaining epochs with those samples weighted by `jtt_upweight`.
pub fn train_jtt(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    check_inputs(&view, config)?;
    let first = config.jtt_first_stage_epochs;
    if first >= config.epochs {
        return Err(Error::config(format!(
            "jtt_first_stage_epochs ({first}) must be below epochs ({})",
            config.epochs
        )));
    }
    let n = view.len();
    let mut history = Vec::with_capacity(config.epochs);
    let mut warnings = Vec::new();

    let mut stage1 = Learner::new(&view, config, config.seed)?;
    let ones = vec![1.0; n];
    for epoch in 0..first {
        let mut log = EpochLog::new(epoch + 1);
        log.loss_biased = fit_epoch(&mut stage1, &view, &ones, config, epoch)?;
        observer.on_epoch(&EpochSnapshot {
            log: &log,
            target_model: &stage1.model,
            biased_model: Some(&stage1.model),
            biased_weights: None,
            debiased_weights: None,
        })?;
        history.push(log);
    }

    let predictions = stage1.model.predict(view.features())?;
    let error_set: Vec<usize> = predictions
        .iter()
        .zip(view.targets())
        .enumerate()
        .filter(|(_, (p, y))| p != y)
        .map(|(i, _)| i)
        .collect();
    if error_set.is_empty() {
        warnings.push("stage-1 model made no training errors; stage 2 is plain ERM".to_string());
    }
    let mut weights = vec![1.0; n];
    for &i in &error_set {
        weights[i] = config.jtt_upweight;
    }
    let weights = WeightVector::from_vec(weights);

    let mut stage2 = Learner::new(&view, config, config.seed.wrapping_add(1))?;
    for epoch in first..config.epochs {
        let mut log = EpochLog::new(epoch + 1);
        log.loss_debiased = fit_epoch(&mut stage2, &view, weights.as_slice(), config, epoch)?;
        observer.on_epoch(&EpochSnapshot {
            log: &log,
            target_model: &stage2.model,
            biased_model: Some(&stage1.model),
            biased_weights: None,
            debiased_weights: Some(&weights),
        })?;
        history.push(log);
    }

    Ok(TrainResult {
        method: Method::Jtt,
        target_model: stage2.model,
        biased_model: Some(stage1.model),
        final_biased_weights: None,
        final_debiased_weights: Some(weights),
        error_set: Some(error_set),
        history,
        warnings,
    })
}
