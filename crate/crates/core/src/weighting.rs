//! Sample-weight rules.
//!
//! The biased model's weights start at one and are multiplied by `alpha`
//! each epoch a sample is misclassified, but only for classes whose error
//! rate is below `t_error`. The target model uses the inverse of those
//! weights, capped, then rebalanced so every class carries the same total
//! weight.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One positive weight per training sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    /// Completed decay rounds.
    pub epoch_count: usize,
}

impl WeightVector {
    pub fn ones(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
            epoch_count: 0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            weights: vec![0.0; n],
            epoch_count: 0,
        }
    }

    pub fn from_vec(weights: Vec<f64>) -> Self {
        Self {
            weights,
            epoch_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        if self.weights.is_empty() {
            return 0.0;
        }
        self.weights.iter().sum::<f64>() / self.weights.len() as f64
    }

    pub fn gather(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.weights[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassErrorReport {
    pub per_class_error: Vec<f64>,
    pub per_sample_correct: Vec<bool>,
}

pub fn class_errors(
    predictions: &[usize],
    labels: &[usize],
    n_classes: usize,
) -> Result<ClassErrorReport> {
    if predictions.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut wrong = vec![0usize; n_classes];
    let mut total = vec![0usize; n_classes];
    let mut per_sample_correct = Vec::with_capacity(labels.len());
    for (&p, &y) in predictions.iter().zip(labels) {
        if y >= n_classes {
            return Err(Error::input(format!("label {y} outside 0..{n_classes}")));
        }
        total[y] += 1;
        let ok = p == y;
        if !ok {
            wrong[y] += 1;
        }
        per_sample_correct.push(ok);
    }
    if let Some(c) = total.iter().position(|&t| t == 0) {
        return Err(Error::input(format!("class {c} has no samples; error rate undefined")));
    }
    Ok(ClassErrorReport {
        per_class_error: wrong
            .iter()
            .zip(&total)
            .map(|(&w, &t)| w as f64 / t as f64)
            .collect(),
        per_sample_correct,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

/// One decay round: misclassified samples of classes with error below
/// `t_error` are scaled by `alpha`.
pub fn echo_update(
    w: &WeightVector,
    report: &ClassErrorReport,
    labels: &[usize],
    alpha: f64,
    t_error: f64,
) -> Result<WeightVector> {
    check_alpha(alpha)?;
    if !(t_error > 0.0 && t_error <= 1.0) {
        return Err(Error::config(format!("t_error must lie in (0, 1], got {t_error}")));
    }
    if w.len() != labels.len() || report.per_sample_correct.len() != labels.len() {
        return Err(Error::shape("weights, report and labels differ in length"));
    }
    let gate: Vec<bool> = report.per_class_error.iter().map(|&e| e < t_error).collect();
    let mut weights = w.weights.clone();
    for ((wi, &y), &correct) in weights.iter_mut().zip(labels).zip(&report.per_sample_correct) {
        let open = *gate.get(y).ok_or_else(|| Error::input(format!("label {y} not in report")))?;
        if open && !correct {
            *wi *= alpha;
        }
    }
    Ok(WeightVector {
        weights,
        epoch_count: w.epoch_count + 1,
    })
}

/// `min(1 / w, cap)` elementwise.
pub fn invert(w: &WeightVector, cap: f64) -> Result<WeightVector> {
    if !(cap >= 1.0) {
        return Err(Error::config(format!("inversion cap must be at least 1, got {cap}")));
    }
    if let Some(bad) = w.weights.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::input(format!("cannot invert non-positive weight {bad}")));
    }
    Ok(WeightVector {
        weights: w.weights.iter().map(|&v| (1.0 / v).min(cap)).collect(),
        epoch_count: w.epoch_count,
    })
}

/// Scales class `c` by `∏_g S_g / S_c`, so every class sums to `∏_g S_g`.
pub fn class_balance(w: &WeightVector, labels: &[usize], n_classes: usize) -> Result<WeightVector> {
    if w.len() != labels.len() {
        return Err(Error::shape("weights and labels differ in length"));
    }
    let mut sums = vec![0.0; n_classes];
    for (&v, &y) in w.weights.iter().zip(labels) {
        if y >= n_classes {
            return Err(Error::input(format!("label {y} outside 0..{n_classes}")));
        }
        sums[y] += v;
    }
    if let Some(c) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::input(format!("class {c} has zero total weight")));
    }
    // ∏_g S_g / S_c computed as ∏_{g≠c} S_g
    let factors: Vec<f64> = (0..n_classes)
        .map(|c| {
            sums.iter()
                .enumerate()
                .filter(|&(g, _)| g != c)
                .map(|(_, s)| s)
                .product()
        })
        .collect();
    if factors.iter().any(|f: &f64| !f.is_finite()) {
        return Err(Error::input("class weight product overflows"));
    }
    Ok(WeightVector {
        weights: w
            .weights
            .iter()
            .zip(labels)
            .map(|(&v, &y)| factors[y] * v)
            .collect(),
        epoch_count: w.epoch_count,
    })
}

/// Multiplies every weight by one constant so the mean becomes 1.
pub fn rescale_to_unit_mean(w: &WeightVector) -> Result<WeightVector> {
    let mean = w.mean();
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::input("weights must have a positive finite mean"));
    }
    let factor = 1.0 / mean;
    Ok(WeightVector {
        weights: w.weights.iter().map(|v| v * factor).collect(),
        epoch_count: w.epoch_count,
    })
}

/// Relative difficulty `L_B / (L_B + L_D)`.
pub fn lff_weight(loss_biased: f64, loss_target: f64) -> Result<f64> {
    if !(loss_biased >= 0.0 && loss_target >= 0.0) {
        return Err(Error::input("losses must be non-negative"));
    }
    let denom = loss_biased + loss_target;
    if denom == 0.0 {
        return Err(Error::input("both losses are zero; relative difficulty undefined"));
    }
    Ok(loss_biased / denom)
}
