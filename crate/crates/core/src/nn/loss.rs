use super::Matrix;
use crate::{Error, Result};

/// Result of a loss evaluation on one batch.
#[derive(Clone, Debug)]
pub struct LossOutput {
    /// Weighted mean of `per_sample` (plain mean for unweighted losses).
    pub total: f64,
    pub per_sample: Vec<f64>,
    /// Gradient of `total` with respect to the logits.
    pub logit_grad: Matrix,
}

fn check_labels(logits: &Matrix, labels: &[usize]) -> Result<()> {
    if labels.len() != logits.rows() {
        return Err(Error::shape(format!(
            "{} labels for {} logit rows",
            labels.len(),
            logits.rows()
        )));
    }
    if logits.rows() == 0 {
        return Err(Error::input("empty batch"));
    }
    let c = logits.cols();
    if let Some(bad) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::input(format!("label {bad} out of range for {c} classes")));
    }
    Ok(())
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            s += *v;
        }
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    out
}

/// `-log softmax(row)[y]`, accurate for confidently correct rows.
fn nll_row(row: &[f64], y: usize) -> f64 {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if row[y] == m {
        let rest: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != y)
            .map(|(_, &v)| (v - m).exp())
            .sum();
        rest.ln_1p()
    } else {
        let s: f64 = row.iter().map(|&v| (v - m).exp()).sum();
        (m - row[y]) + s.ln()
    }
}

/// Unweighted per-sample cross entropy.
pub fn per_sample_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<Vec<f64>> {
    check_labels(logits, labels)?;
    Ok(logits
        .iter_rows()
        .zip(labels)
        .map(|(row, &y)| nll_row(row, y))
        .collect())
}

/// Cross entropy averaged with per-sample weights: `Σ wᵢ ℓᵢ / Σ wᵢ`.
pub fn weighted_cross_entropy(
    logits: &Matrix,
    labels: &[usize],
    weights: &[f64],
) -> Result<LossOutput> {
    check_labels(logits, labels)?;
    if weights.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} weights for {} samples",
            weights.len(),
            labels.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::input("sample weights must be finite and non-negative"));
    }
    let weight_sum: f64 = weights.iter().sum();
    if weight_sum <= 0.0 {
        return Err(Error::input("batch weights sum to zero; weighted mean undefined"));
    }

    let per_sample = per_sample_cross_entropy(logits, labels)?;
    let total = per_sample
        .iter()
        .zip(weights)
        .map(|(l, w)| w * l)
        .sum::<f64>()
        / weight_sum;

    let mut logit_grad = softmax_rows(logits);
    for (r, (&y, &w)) in labels.iter().zip(weights).enumerate() {
        let scale = w / weight_sum;
        let row = logit_grad.row_mut(r);
        row[y] -= 1.0;
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(LossOutput {
        total,
        per_sample,
        logit_grad,
    })
}

/// Generalized cross entropy `(1 - p_y^q) / q`, averaged over the batch.
pub fn gce_loss(logits: &Matrix, labels: &[usize], q: f64) -> Result<LossOutput> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::config(format!("GCE q must lie in (0, 1], got {q}")));
    }
    check_labels(logits, labels)?;
    let n = labels.len() as f64;
    let mut probs = softmax_rows(logits);
    let mut per_sample = Vec::with_capacity(labels.len());
    for (r, &y) in labels.iter().enumerate() {
        let row = probs.row_mut(r);
        let py_q = row[y].powf(q);
        per_sample.push((1.0 - py_q) / q);
        // d/dz_j = p_y^q (p_j - [j = y])
        row[y] -= 1.0;
        row.iter_mut().for_each(|v| *v *= py_q / n);
    }
    let total = per_sample.iter().sum::<f64>() / n;
    Ok(LossOutput {
        total,
        per_sample,
        logit_grad: probs,
    })
}
