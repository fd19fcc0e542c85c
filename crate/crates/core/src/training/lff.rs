use super::vanilla::check_inputs;
use super::{epoch_batches, gather_labels, mean_of, EpochLog, EpochObserver, EpochSnapshot};
use super::{Learner, Method, TrainConfig, TrainResult};
use crate::data::TrainView;
use crate::nn::{gce_loss, per_sample_cross_entropy, weighted_cross_entropy};
use crate::weighting::{lff_weight, WeightVector};
use crate::Result;

/// Relative-difficulty weights for one batch. Samples both models fit
/// perfectly (both losses exactly zero) get weight zero.
pub fn lff_batch_weights(ce_biased: &[f64], ce_target: &[f64]) -> Result<Vec<f64>> {
    ce_biased
        .iter()
        .zip(ce_target)
        .map(|(&b, &d)| {
            if b == 0.0 && d == 0.0 {
                Ok(0.0)
            } else {
                lff_weight(b, d)
            }
        })
        .collect()
}

/// Learning-from-failure baseline: a GCE-trained biased model (seed) and a
/// target model (seed + 1) trained on cross entropy weighted by
/// `L_B / (L_B + L_D)`, both updated on every batch.
pub fn train_lff(
    view: TrainView<'_>,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    check_inputs(&view, config)?;
    let n = view.len();
    let mut biased = Learner::new(&view, config, config.seed)?;
    let mut target = Learner::new(&view, config, config.seed.wrapping_add(1))?;
    // last weight seen per sample, for diagnostics
    let mut last_weights = WeightVector::from_vec(vec![0.5; n]);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut log = EpochLog::new(epoch + 1);
        let mut loss_b = Vec::new();
        let mut loss_d = Vec::new();
        for batch in epoch_batches(n, config.batch_size, config.seed, epoch) {
            let x = view.features().select_rows(&batch);
            let y = gather_labels(view.targets(), &batch);

            let trace_b = biased.model.forward_trace(&x)?;
            let trace_d = target.model.forward_trace(&x)?;
            let ce_b = per_sample_cross_entropy(trace_b.logits(), &y)?;
            let ce_d = per_sample_cross_entropy(trace_d.logits(), &y)?;
            let w = lff_batch_weights(&ce_b, &ce_d)?;
            for (&i, &wi) in batch.iter().zip(&w) {
                last_weights.weights[i] = wi;
            }

            let gce = gce_loss(trace_b.logits(), &y, config.q)?;
            let grads = biased.model.backward_trace(&trace_b, &gce.logit_grad)?;
            biased.opt.step(&mut biased.model, &grads)?;
            loss_b.push(gce.total);

            if w.iter().any(|&v| v > 0.0) {
                let ce = weighted_cross_entropy(trace_d.logits(), &y, &w)?;
                let grads = target.model.backward_trace(&trace_d, &ce.logit_grad)?;
                target.opt.step(&mut target.model, &grads)?;
                loss_d.push(ce.total);
            }
        }
        log.loss_biased = mean_of(&loss_b);
        log.loss_debiased = mean_of(&loss_d);
        observer.on_epoch(&EpochSnapshot {
            log: &log,
            target_model: &target.model,
            biased_model: Some(&biased.model),
            biased_weights: None,
            debiased_weights: Some(&last_weights),
        })?;
        history.push(log);
    }

    Ok(TrainResult {
        method: Method::Lff,
        target_model: target.model,
        biased_model: Some(biased.model),
        final_biased_weights: None,
        final_debiased_weights: Some(last_weights),
        error_set: None,
        history,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_losses_give_half() {
        let ce = [0.3, 1.7, 0.01];
        assert_eq!(lff_batch_weights(&ce, &ce).unwrap(), vec![0.5; 3]);
        assert_eq!(lff_batch_weights(&[0.0], &[0.0]).unwrap(), vec![0.0]);
    }
}
