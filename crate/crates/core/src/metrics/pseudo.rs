use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::weighting::WeightVector;
use crate::{Error, Result};

/// Quality of flagging samples as bias-conflicting (conflicting on at least
/// one bias) against the hidden ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelReport {
    pub threshold: f64,
    pub flagged: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn report(flags: &[bool], dataset: &LabeledDataset, threshold: f64) -> PseudoLabelReport {
    let mut tp = 0usize;
    let mut flagged = 0usize;
    let mut positives = 0usize;
    for (i, &f) in flags.iter().enumerate() {
        let truth = dataset.is_conflicting(i);
        positives += truth as usize;
        flagged += f as usize;
        tp += (f && truth) as usize;
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, flagged);
    let recall = ratio(tp, positives);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    PseudoLabelReport {
        threshold,
        flagged,
        precision,
        recall,
        f1,
    }
}

/// Flags samples whose biased-model weight is below `threshold`.
pub fn pseudo_label_quality(
    weights: &WeightVector,
    dataset: &LabeledDataset,
    threshold: f64,
) -> Result<PseudoLabelReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::config(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    if weights.len() != dataset.len() {
        return Err(Error::shape("weights and dataset differ in length"));
    }
    let flags: Vec<bool> = weights.weights.iter().map(|&w| w < threshold).collect();
    Ok(report(&flags, dataset, threshold))
}

/// Flags the `k` samples with the highest scores (e.g. per-sample losses);
/// ties go to the lower index. The reported threshold is the k-th score.
pub fn loss_ranking_quality(
    scores: &[f64],
    dataset: &LabeledDataset,
    k: usize,
) -> Result<PseudoLabelReport> {
    if scores.len() != dataset.len() {
        return Err(Error::shape("scores and dataset differ in length"));
    }
    if k > scores.len() {
        return Err(Error::input(format!("cannot flag {k} of {} samples", scores.len())));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut flags = vec![false; scores.len()];
    for &i in &order[..k] {
        flags[i] = true;
    }
    let threshold = if k == 0 { f64::INFINITY } else { scores[order[k - 1]] };
    Ok(report(&flags, dataset, threshold))
}
