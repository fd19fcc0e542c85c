//! Group metrics against naive loops over samples.

use std::collections::HashMap;

use echoes::data::{LabeledDataset, Role};
use echoes::metrics::{
    avg_bias_gap, bias_gap, group_accuracy_from_predictions, loss_ranking_quality,
    pseudo_label_quality,
};
use echoes::nn::Matrix;
use echoes::weighting::WeightVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_fixture(seed: u64, n: usize, c: usize, k: usize) -> (LabeledDataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let bias: Vec<usize> = (0..n * k).map(|_| rng.random_range(0..c)).collect();
    // predictions correct with a probability that depends on the first bias
    let preds: Vec<usize> = (0..n)
        .map(|i| {
            let aligned = bias[i * k] == targets[i];
            let p = if aligned { 0.9 } else { 0.4 };
            if rng.random::<f64>() < p {
                targets[i]
            } else {
                rng.random_range(0..c)
            }
        })
        .collect();
    let ds =
        LabeledDataset::new(Matrix::zeros(n, 1), targets, bias, c, k, Role::Train).unwrap();
    (ds, preds)
}

/// Alignment string such as "AC" for sample `i`.
fn pattern(ds: &LabeledDataset, i: usize) -> String {
    ds.bias_labels(i)
        .iter()
        .map(|&b| if b == ds.targets()[i] { 'A' } else { 'C' })
        .collect()
}

fn naive_group_acc(ds: &LabeledDataset, preds: &[usize]) -> HashMap<(usize, String), f64> {
    let mut tally: HashMap<(usize, String), (usize, usize)> = HashMap::new();
    for i in 0..ds.len() {
        let e = tally.entry((ds.targets()[i], pattern(ds, i))).or_default();
        e.1 += 1;
        if preds[i] == ds.targets()[i] {
            e.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(key, (c, t))| (key, c as f64 / t as f64))
        .collect()
}

fn naive_pattern_acc(ds: &LabeledDataset, preds: &[usize]) -> HashMap<String, f64> {
    let mut tally: HashMap<String, (usize, usize)> = HashMap::new();
    for i in 0..ds.len() {
        let e = tally.entry(pattern(ds, i)).or_default();
        e.1 += 1;
        if preds[i] == ds.targets()[i] {
            e.0 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(key, (c, t))| (key, c as f64 / t as f64))
        .collect()
}

/// All alignment strings of length `k` in lexicographic order (A < C).
fn all_patterns(k: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| [format!("{p}A"), format!("{p}C")])
            .collect();
    }
    out
}

fn naive_gap(acc: &HashMap<String, f64>, k: usize, bias: usize) -> f64 {
    let mut sum = 0.0;
    let mut terms = 0;
    for p in all_patterns(k) {
        if p.as_bytes()[bias] != b'A' {
            continue;
        }
        let mut flipped = p.clone().into_bytes();
        flipped[bias] = b'C';
        let flipped = String::from_utf8(flipped).unwrap();
        sum += (acc[&p] - acc[&flipped]).abs();
        terms += 1;
    }
    sum / terms as f64
}

#[test]
fn group_accuracy_matches_brute_force() {
    for (seed, c, k) in [(1, 2, 2), (2, 3, 2), (3, 2, 3), (4, 2, 1)] {
        let (ds, preds) = random_fixture(seed, 1000, c, k);
        let m = group_accuracy_from_predictions(&preds, &ds).unwrap();
        let naive = naive_group_acc(&ds, &preds);
        assert_eq!(m.per_group_acc.len(), naive.len());
        for (group, &acc) in &m.per_group_acc {
            assert_eq!(acc, naive[&(group.target, group.alignment.to_string())], "{group}");
        }
        let accs: Vec<f64> = m.per_group_acc.values().copied().collect();
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert_eq!(m.avg_group_acc, mean);
        assert_eq!(m.worst_group_acc, accs.iter().copied().fold(1.0, f64::min));

        let pooled = naive_pattern_acc(&ds, &preds);
        for (p, &acc) in &m.per_alignment_acc {
            assert_eq!(acc, pooled[&p.to_string()]);
        }
        let mut gap_sum = 0.0;
        for b in 0..k {
            let g = bias_gap(&m, b).unwrap();
            assert_eq!(g, naive_gap(&pooled, k, b), "seed {seed} bias {b}");
            gap_sum += g;
        }
        assert_eq!(avg_bias_gap(&m).unwrap(), gap_sum / k as f64);
    }
}

#[test]
fn first_bias_drives_the_gap() {
    let (ds, preds) = random_fixture(7, 1000, 2, 2);
    let m = group_accuracy_from_predictions(&preds, &ds).unwrap();
    assert!(bias_gap(&m, 0).unwrap() > bias_gap(&m, 1).unwrap());
}

#[test]
fn pseudo_label_report_matches_counting() {
    let (ds, _) = random_fixture(11, 1000, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w: Vec<f64> = (0..ds.len())
        .map(|i| {
            if ds.is_conflicting(i) {
                rng.random_range(0.0..0.8)
            } else {
                rng.random_range(0.3..1.0)
            }
        })
        .collect();
    let r = pseudo_label_quality(&WeightVector::from_vec(w.clone()), &ds, 0.5).unwrap();
    let flagged: Vec<bool> = w.iter().map(|&v| v < 0.5).collect();
    let tp = (0..ds.len()).filter(|&i| flagged[i] && ds.is_conflicting(i)).count();
    let fp = (0..ds.len()).filter(|&i| flagged[i] && !ds.is_conflicting(i)).count();
    let fneg = (0..ds.len()).filter(|&i| !flagged[i] && ds.is_conflicting(i)).count();
    assert_eq!(r.flagged, tp + fp);
    assert_eq!(r.precision, tp as f64 / (tp + fp) as f64);
    assert_eq!(r.recall, tp as f64 / (tp + fneg) as f64);
    let f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    assert_eq!(r.f1, f1);

    // ranking by 1 - w flags the same samples when k equals the flag count
    // and no weight sits exactly on the threshold
    let scores: Vec<f64> = w.iter().map(|v| 1.0 - v).collect();
    let ranked = loss_ranking_quality(&scores, &ds, r.flagged).unwrap();
    assert_eq!(ranked.f1, r.f1);
}
