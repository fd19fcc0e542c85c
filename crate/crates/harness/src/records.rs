use std::collections::BTreeMap;

use echoes::training::Method;
use serde::{Deserialize, Serialize};

/// Final metrics of one (run, seed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub config_hash: String,
    pub label: String,
    pub method: Method,
    pub seed: u64,
    pub avg_group_acc: f64,
    pub worst_group_acc: f64,
    /// One gap per bias attribute.
    pub bias_gaps: Vec<f64>,
    pub avg_bias_gap: f64,
    /// F1 of flagging echo weights below the threshold (Echoes only).
    pub pseudo_f1: Option<f64>,
    pub pseudo_flagged: Option<usize>,
    /// Test accuracy of the auxiliary biased model on all-aligned samples.
    pub biased_aligned_acc: Option<f64>,
    pub per_group_acc: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Mean and sample standard deviation; the deviation is absent below two
/// values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        });
        Some(Self { mean, std })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub config_hash: String,
    pub label: String,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub avg_group_acc: Stat,
    pub worst_group_acc: Stat,
    pub bias_gaps: Vec<Stat>,
    pub avg_bias_gap: Stat,
    pub pseudo_f1: Option<Stat>,
    pub biased_aligned_acc: Option<Stat>,
}

impl SummaryRow {
    /// Summarizes records sharing one label. `records` must be non-empty.
    pub fn from_records(records: &[&MetricRecord]) -> Self {
        let first = records[0];
        let column = |f: &dyn Fn(&MetricRecord) -> f64| {
            Stat::of(&records.iter().map(|r| f(r)).collect::<Vec<_>>()).expect("non-empty")
        };
        let optional = |f: &dyn Fn(&MetricRecord) -> Option<f64>| {
            let vals: Option<Vec<f64>> = records.iter().map(|r| f(r)).collect();
            vals.and_then(|v| Stat::of(&v))
        };
        Self {
            config_hash: first.config_hash.clone(),
            label: first.label.clone(),
            method: first.method,
            seeds: records.iter().map(|r| r.seed).collect(),
            avg_group_acc: column(&|r| r.avg_group_acc),
            worst_group_acc: column(&|r| r.worst_group_acc),
            bias_gaps: (0..first.bias_gaps.len())
                .map(|k| column(&|r| r.bias_gaps[k]))
                .collect(),
            avg_bias_gap: column(&|r| r.avg_bias_gap),
            pseudo_f1: optional(&|r| r.pseudo_f1),
            biased_aligned_acc: optional(&|r| r.biased_aligned_acc),
        }
    }
}

/// Groups records by label, keeping first-seen order.
pub fn summarize(records: &[MetricRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.label.as_str()) {
            order.push(&r.label);
        }
    }
    order
        .into_iter()
        .map(|label| {
            let group: Vec<&MetricRecord> = records.iter().filter(|r| r.label == label).collect();
            SummaryRow::from_records(&group)
        })
        .collect()
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn record_header(n_biases: usize) -> Vec<String> {
    let mut h: Vec<String> = ["config_hash", "label", "method", "seed", "avg_group_acc", "worst_group_acc"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..n_biases).map(|k| format!("gap_bias{k}")));
    h.extend(
        ["avg_bias_gap", "pseudo_f1", "biased_aligned_acc"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

pub(crate) fn record_fields(r: &MetricRecord) -> Vec<String> {
    let mut f = vec![
        r.config_hash.clone(),
        r.label.clone(),
        r.method.name().to_string(),
        r.seed.to_string(),
        r.avg_group_acc.to_string(),
        r.worst_group_acc.to_string(),
    ];
    f.extend(r.bias_gaps.iter().map(f64::to_string));
    f.push(r.avg_bias_gap.to_string());
    f.push(fmt_opt(r.pseudo_f1));
    f.push(fmt_opt(r.biased_aligned_acc));
    f
}

pub(crate) fn summary_header(n_biases: usize) -> Vec<String> {
    let mut h: Vec<String> = ["config_hash", "label", "method", "n_runs", "seeds"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut stat = |name: &str| {
        h.push(format!("{name}_mean"));
        h.push(format!("{name}_std"));
    };
    stat("avg_group_acc");
    stat("worst_group_acc");
    for k in 0..n_biases {
        stat(&format!("gap_bias{k}"));
    }
    stat("avg_bias_gap");
    stat("pseudo_f1");
    stat("biased_aligned_acc");
    h
}

pub(crate) fn summary_fields(s: &SummaryRow) -> Vec<String> {
    let seeds: Vec<String> = s.seeds.iter().map(u64::to_string).collect();
    let mut f = vec![
        s.config_hash.clone(),
        s.label.clone(),
        s.method.name().to_string(),
        s.seeds.len().to_string(),
        seeds.join(";"),
    ];
    let mut stat = |st: Option<&Stat>| {
        f.push(fmt_opt(st.map(|s| s.mean)));
        f.push(fmt_opt(st.and_then(|s| s.std)));
    };
    stat(Some(&s.avg_group_acc));
    stat(Some(&s.worst_group_acc));
    for g in &s.bias_gaps {
        stat(Some(g));
    }
    stat(Some(&s.avg_bias_gap));
    stat(s.pseudo_f1.as_ref());
    stat(s.biased_aligned_acc.as_ref());
    f
}
