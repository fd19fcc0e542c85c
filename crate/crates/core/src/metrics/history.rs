use std::fmt;

use crate::data::{GroupId, LabeledDataset};
use crate::nn::MlpModel;
use crate::training::{EpochObserver, EpochSnapshot};
use crate::weighting::WeightVector;
use crate::Result;

/// Which model is evaluated on which split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Series {
    BiasedTrain,
    TargetTrain,
    TargetTest,
}

impl Series {
    pub const ALL: [Series; 3] = [Series::BiasedTrain, Series::TargetTrain, Series::TargetTest];

    pub fn name(self) -> &'static str {
        match self {
            Series::BiasedTrain => "biased_train",
            Series::TargetTrain => "target_train",
            Series::TargetTest => "target_test",
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One (epoch, series, group) measurement plus the epoch-level scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    pub split: Series,
    pub group: GroupId,
    pub error_rate: f64,
    /// Mean sample weight over bias-aligned / bias-conflicting train
    /// samples. Uses the biased-model weights when the method has them,
    /// otherwise the target-model weights.
    pub mean_weight_aligned: Option<f64>,
    pub mean_weight_conflicting: Option<f64>,
    pub loss_biased: Option<f64>,
    pub loss_debiased: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorPoint {
    pub epoch: usize,
    pub group: GroupId,
    pub error_rate: f64,
}

struct Split<'a> {
    data: &'a LabeledDataset,
    groups: Vec<usize>,
    counts: Vec<usize>,
    ids: Vec<GroupId>,
}

impl<'a> Split<'a> {
    fn new(data: &'a LabeledDataset) -> Self {
        let groups = data.group_indices();
        let mut counts = vec![0; data.n_groups()];
        for &g in &groups {
            counts[g] += 1;
        }
        let mut ids = GroupId::all(data.n_classes(), data.n_biases());
        ids.sort_by_key(GroupId::index);
        Self {
            data,
            groups,
            counts,
            ids,
        }
    }

    /// Error rate per non-empty group, in group order.
    fn errors(&self, model: &MlpModel) -> Result<Vec<(GroupId, f64)>> {
        let predictions = model.predict(self.data.features())?;
        let mut wrong = vec![0usize; self.counts.len()];
        for ((&g, &p), &y) in self.groups.iter().zip(&predictions).zip(self.data.targets()) {
            if p != y {
                wrong[g] += 1;
            }
        }
        let mut out: Vec<(GroupId, f64)> = self
            .ids
            .iter()
            .filter(|id| self.counts[id.index()] > 0)
            .map(|id| {
                let g = id.index();
                (id.clone(), wrong[g] as f64 / self.counts[g] as f64)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
}

/// Observer that records per-group error rates each epoch. Holds the bias
/// labels the trainers never see.
pub struct GroupHistory<'a> {
    train: Split<'a>,
    test: Option<Split<'a>>,
    series: Vec<Series>,
    rows: Vec<HistoryRow>,
}

impl<'a> GroupHistory<'a> {
    pub fn new(train: &'a LabeledDataset, test: Option<&'a LabeledDataset>) -> Self {
        Self {
            train: Split::new(train),
            test: test.map(Split::new),
            series: Series::ALL.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Restricts recording to the given series.
    pub fn with_series(mut self, series: &[Series]) -> Self {
        self.series = series.to_vec();
        self
    }

    pub fn rows(&self) -> &[HistoryRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<HistoryRow> {
        self.rows
    }

    fn weight_means(&self, w: &WeightVector) -> (Option<f64>, Option<f64>) {
        let (mut sa, mut na, mut sc, mut nc) = (0.0, 0usize, 0.0, 0usize);
        for (i, &v) in w.weights.iter().enumerate() {
            if self.train.data.is_conflicting(i) {
                sc += v;
                nc += 1;
            } else {
                sa += v;
                na += 1;
            }
        }
        let mean = |s: f64, n: usize| (n > 0).then(|| s / n as f64);
        (mean(sa, na), mean(sc, nc))
    }
}

impl EpochObserver for GroupHistory<'_> {
    fn on_epoch(&mut self, snap: &EpochSnapshot<'_>) -> Result<()> {
        let weights = snap.biased_weights.or(snap.debiased_weights);
        let (aligned, conflicting) = match weights {
            Some(w) if w.len() == self.train.data.len() => self.weight_means(w),
            _ => (None, None),
        };
        for series in self.series.clone() {
            let (split, model) = match series {
                Series::BiasedTrain => match snap.biased_model {
                    Some(m) => (&self.train, m),
                    None => continue,
                },
                Series::TargetTrain => (&self.train, snap.target_model),
                Series::TargetTest => match &self.test {
                    Some(t) => (t, snap.target_model),
                    None => continue,
                },
            };
            for (group, error_rate) in split.errors(model)? {
                self.rows.push(HistoryRow {
                    epoch: snap.log.epoch,
                    split: series,
                    group,
                    error_rate,
                    mean_weight_aligned: aligned,
                    mean_weight_conflicting: conflicting,
                    loss_biased: snap.log.loss_biased,
                    loss_debiased: snap.log.loss_debiased,
                });
            }
        }
        Ok(())
    }
}

/// Per-group error-rate series for one model/split, ready for plotting.
pub fn error_curves(rows: &[HistoryRow], series: Series) -> Vec<ErrorPoint> {
    rows.iter()
        .filter(|r| r.split == series)
        .map(|r| ErrorPoint {
            epoch: r.epoch,
            group: r.group.clone(),
            error_rate: r.error_rate,
        })
        .collect()
}
