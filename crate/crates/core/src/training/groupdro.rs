use super::vanilla::check_inputs;
use super::{epoch_batches, gather_labels, mean_of, EpochLog, EpochObserver, EpochSnapshot};
use super::{Learner, Method, TrainConfig, TrainResult};
use crate::data::LabeledDataset;
use crate::nn::{per_sample_cross_entropy, weighted_cross_entropy};
use crate::{Error, Result};

/// Exponentiated-gradient update of the group mixture for one batch.
/// Groups absent from the batch keep their mass before renormalization.
pub fn update_group_weights(q: &mut [f64], group_losses: &[Option<f64>], step: f64) {
    for (qg, loss) in q.iter_mut().zip(group_losses) {
        if let Some(l) = loss {
            *qg *= (step * l).exp();
        }
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
}

/// Supervised reference: reweights the batch loss by a mixture over joint
/// (target x alignment) groups that drifts toward the worst-off groups.
pub fn train_groupdro(
    dataset: &LabeledDataset,
    config: &TrainConfig,
    observer: &mut dyn EpochObserver,
) -> Result<TrainResult> {
    let view = dataset.view();
    check_inputs(&view, config)?;
    if dataset.n_biases() == 0 {
        return Err(Error::input("GroupDRO needs bias labels"));
    }
    let n = dataset.len();
    let groups = dataset.group_indices();
    let n_groups = dataset.n_groups();
    let mut q = vec![1.0 / n_groups as f64; n_groups];
    let mut learner = Learner::new(&view, config, config.seed)?;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut log = EpochLog::new(epoch + 1);
        let mut losses = Vec::new();
        for batch in epoch_batches(n, config.batch_size, config.seed, epoch) {
            let x = view.features().select_rows(&batch);
            let y = gather_labels(view.targets(), &batch);
            let g: Vec<usize> = batch.iter().map(|&i| groups[i]).collect();

            let trace = learner.model.forward_trace(&x)?;
            let ce = per_sample_cross_entropy(trace.logits(), &y)?;
            let mut sums = vec![0.0; n_groups];
            let mut counts = vec![0usize; n_groups];
            for (&gi, &l) in g.iter().zip(&ce) {
                sums[gi] += l;
                counts[gi] += 1;
            }
            let group_losses: Vec<Option<f64>> = sums
                .iter()
                .zip(&counts)
                .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
                .collect();
            update_group_weights(&mut q, &group_losses, config.groupdro_step);

            let w: Vec<f64> = g.iter().map(|&gi| q[gi] / counts[gi] as f64).collect();
            let loss = weighted_cross_entropy(trace.logits(), &y, &w)?;
            let grads = learner.model.backward_trace(&trace, &loss.logit_grad)?;
            learner.opt.step(&mut learner.model, &grads)?;
            losses.push(loss.total);
        }
        log.loss_debiased = mean_of(&losses);
        log.group_weights = Some(q.clone());
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
        method: Method::GroupDro,
        target_model: learner.model,
        biased_model: None,
        final_biased_weights: None,
        final_debiased_weights: None,
        error_set: None,
        history,
        warnings: Vec::new(),
    })
}
