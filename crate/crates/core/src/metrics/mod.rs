//! Group-level evaluation.
//!
//! Average and worst accuracy run over the `C · 2^K` joint groups. Bias gaps
//! run over alignment patterns pooled across target classes: the gap for
//! bias `k` is the mean, over every pattern of the other biases, of the
//! absolute accuracy change when bias `k` flips from aligned to conflicting.

mod history;
mod pseudo;

use std::collections::BTreeMap;

use crate::data::{Alignment, AlignmentPattern, GroupId, LabeledDataset};
use crate::nn::MlpModel;
use crate::{Error, Result};

pub use history::{error_curves, ErrorPoint, GroupHistory, HistoryRow, Series};
pub use pseudo::{loss_ranking_quality, pseudo_label_quality, PseudoLabelReport};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupMetrics {
    pub per_group_acc: BTreeMap<GroupId, f64>,
    pub avg_group_acc: f64,
    pub worst_group_acc: f64,
    pub per_alignment_acc: BTreeMap<AlignmentPattern, f64>,
}

impl GroupMetrics {
    pub fn n_biases(&self) -> usize {
        self.per_alignment_acc
            .keys()
            .next()
            .map_or(0, AlignmentPattern::n_biases)
    }

    /// Pooled accuracy over all-aligned samples.
    pub fn aligned_acc(&self) -> Option<f64> {
        self.per_alignment_acc
            .iter()
            .find(|(p, _)| p.is_all_aligned())
            .map(|(_, &a)| a)
    }
}

pub fn group_accuracy(model: &MlpModel, dataset: &LabeledDataset) -> Result<GroupMetrics> {
    let predictions = model.predict(dataset.features())?;
    group_accuracy_from_predictions(&predictions, dataset)
}

/// Fails if any joint group has no samples.
pub fn group_accuracy_from_predictions(
    predictions: &[usize],
    dataset: &LabeledDataset,
) -> Result<GroupMetrics> {
    if predictions.len() != dataset.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} samples",
            predictions.len(),
            dataset.len()
        )));
    }
    let n_groups = dataset.n_groups();
    let n_patterns = 1usize << dataset.n_biases();
    let mut correct = vec![0usize; n_groups];
    let mut total = vec![0usize; n_groups];
    for ((g, &p), &y) in dataset
        .group_indices()
        .into_iter()
        .zip(predictions)
        .zip(dataset.targets())
    {
        total[g] += 1;
        if p == y {
            correct[g] += 1;
        }
    }

    let mut per_group_acc = BTreeMap::new();
    for group in GroupId::all(dataset.n_classes(), dataset.n_biases()) {
        let g = group.index();
        if total[g] == 0 {
            return Err(Error::input(format!("group {group} has no samples")));
        }
        per_group_acc.insert(group, correct[g] as f64 / total[g] as f64);
    }

    let mut per_alignment_acc = BTreeMap::new();
    for mask in 0..n_patterns {
        let (c, t) = (0..dataset.n_classes())
            .map(|y| (y << dataset.n_biases()) + mask)
            .fold((0, 0), |(c, t), g| (c + correct[g], t + total[g]));
        per_alignment_acc.insert(
            AlignmentPattern::from_mask(mask, dataset.n_biases()),
            c as f64 / t as f64,
        );
    }

    let accs: Vec<f64> = per_group_acc.values().copied().collect();
    let avg_group_acc = accs.iter().sum::<f64>() / accs.len() as f64;
    let worst_group_acc = accs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GroupMetrics {
        per_group_acc,
        avg_group_acc,
        worst_group_acc,
        per_alignment_acc,
    })
}

/// Gap for bias `k`. For two biases this is
/// `(|acc(AA) - acc(CA)| + |acc(AC) - acc(CC)|) / 2` with `k = 0`.
pub fn bias_gap(metrics: &GroupMetrics, k: usize) -> Result<f64> {
    let n_biases = metrics.n_biases();
    if k >= n_biases {
        return Err(Error::input(format!(
            "bias index {k} out of range for {n_biases} biases"
        )));
    }
    let mut sum = 0.0;
    let mut terms = 0usize;
    for (pattern, &acc_aligned) in &metrics.per_alignment_acc {
        if pattern.0[k] != Alignment::Aligned {
            continue;
        }
        let flipped = pattern.with(k, Alignment::Conflicting);
        let acc_conflicting = *metrics
            .per_alignment_acc
            .get(&flipped)
            .ok_or_else(|| Error::input(format!("missing accuracy for pattern {flipped}")))?;
        sum += (acc_aligned - acc_conflicting).abs();
        terms += 1;
    }
    Ok(sum / terms as f64)
}

pub fn bias_gaps(metrics: &GroupMetrics) -> Result<Vec<f64>> {
    (0..metrics.n_biases()).map(|k| bias_gap(metrics, k)).collect()
}

/// Mean of the per-bias gaps.
pub fn avg_bias_gap(metrics: &GroupMetrics) -> Result<f64> {
    let gaps = bias_gaps(metrics)?;
    if gaps.is_empty() {
        return Err(Error::input("no bias attributes"));
    }
    Ok(gaps.iter().sum::<f64>() / gaps.len() as f64)
}
