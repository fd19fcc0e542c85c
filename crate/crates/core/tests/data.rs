use echoes::data::{generate, load_csv, load_csv_with_classes, save_csv, Role, SyntheticSpec};
use echoes::Error;

fn binomial_ok(count: usize, n: usize, p: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 4.0 * sd.max(1e-12)
}

#[test]
fn default_group_counts_follow_the_skew() {
    let spec = SyntheticSpec::default();
    let (train, test) = generate(&spec).unwrap();
    assert_eq!(train.len(), 8000);
    assert_eq!(test.len(), 1000);
    assert_eq!(train.n_features(), spec.n_features());

    // pooled over classes: AA, CA, AC, CC in mask order (bit k = bias k conflicts)
    let counts = train.group_counts();
    let pooled: Vec<usize> = (0..4).map(|m| counts[m] + counts[4 + m]).collect();
    let probs = [0.95 * 0.95, 0.05 * 0.95, 0.95 * 0.05, 0.05 * 0.05];
    for (m, (&c, &p)) in pooled.iter().zip(&probs).enumerate() {
        assert!(binomial_ok(c, 8000, p), "pattern {m}: {c} vs {}", p * 8000.0);
    }
    for k in 0..2 {
        let aligned = (0..train.len())
            .filter(|&i| train.bias_labels(i)[k] == train.targets()[i])
            .count();
        assert!(binomial_ok(aligned, 8000, 0.95), "bias {k}: {aligned}");
    }
    assert_eq!(test.group_counts(), vec![125; 8]);
}

#[test]
fn full_skew_leaves_no_conflicting_samples() {
    let spec = SyntheticSpec {
        skew: vec![1.0, 1.0],
        n_train: 500,
        ..SyntheticSpec::default()
    };
    let (train, _) = generate(&spec).unwrap();
    assert!((0..train.len()).all(|i| !train.is_conflicting(i)));
}

#[test]
fn generation_is_seeded() {
    let spec = SyntheticSpec {
        n_train: 300,
        n_test: 200,
        ..SyntheticSpec::default()
    };
    assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    let other = SyntheticSpec { seed: 1, ..spec.clone() };
    assert_ne!(generate(&spec).unwrap().0, generate(&other).unwrap().0);
}

#[test]
fn three_classes_and_three_biases() {
    let spec = SyntheticSpec {
        n_classes: 3,
        n_biases: 3,
        skew: vec![0.9, 0.8, 0.95],
        bias_sep: vec![3.0, 3.0, 3.0],
        block_dim: 3,
        n_train: 3000,
        n_test: 240,
        ..SyntheticSpec::default()
    };
    let (train, test) = generate(&spec).unwrap();
    assert_eq!(test.group_counts(), vec![10; 24]);
    for (k, &p) in spec.skew.iter().enumerate() {
        let aligned = (0..train.len())
            .filter(|&i| train.bias_labels(i)[k] == train.targets()[i])
            .count();
        assert!(binomial_ok(aligned, 3000, p));
    }
}

/// Nearest-centroid probe on one feature block, fit on train and scored on
/// the balanced test split.
fn probe_accuracy(
    train: &echoes::data::LabeledDataset,
    test: &echoes::data::LabeledDataset,
    cols: std::ops::Range<usize>,
    label: impl Fn(&echoes::data::LabeledDataset, usize) -> usize,
) -> f64 {
    let c = train.n_classes();
    let width = cols.len();
    let mut centroids = vec![vec![0.0; width]; c];
    let mut counts = vec![0usize; c];
    for i in 0..train.len() {
        let l = label(train, i);
        counts[l] += 1;
        for (j, col) in cols.clone().enumerate() {
            centroids[l][j] += train.features().get(i, col);
        }
    }
    for (cent, &n) in centroids.iter_mut().zip(&counts) {
        cent.iter_mut().for_each(|v| *v /= n as f64);
    }
    let hits = (0..test.len())
        .filter(|&i| {
            let best = (0..c)
                .map(|l| {
                    let d: f64 = cols
                        .clone()
                        .enumerate()
                        .map(|(j, col)| (test.features().get(i, col) - centroids[l][j]).powi(2))
                        .sum();
                    (d, l)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap()
                .1;
            best == label(test, i)
        })
        .count();
    hits as f64 / test.len() as f64
}

#[test]
fn bias_blocks_are_easier_than_the_target_block() {
    let spec = SyntheticSpec::default();
    let (train, test) = generate(&spec).unwrap();
    let d = spec.block_dim;
    let target = probe_accuracy(&train, &test, 0..d, |ds, i| ds.targets()[i]);
    for k in 0..spec.n_biases {
        let cols = (1 + k) * d..(2 + k) * d;
        let bias = probe_accuracy(&train, &test, cols, |ds, i| ds.bias_labels(i)[k]);
        assert!(bias > target + 0.05, "bias {k}: {bias} vs target {target}");
    }
    assert!(target > 0.6);
    let noise_cols = spec.n_features() - spec.noise_dim..spec.n_features();
    let noise = probe_accuracy(&train, &test, noise_cols, |ds, i| ds.targets()[i]);
    assert!((noise - 0.5).abs() < 0.1);
}

#[test]
fn csv_round_trip_is_exact() {
    let spec = SyntheticSpec {
        n_train: 64,
        n_test: 16,
        ..SyntheticSpec::default()
    };
    let (train, test) = generate(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    save_csv(&train, &path).unwrap();
    assert_eq!(load_csv(&path, Role::Train).unwrap(), train);
    let path = dir.path().join("test.csv");
    save_csv(&test, &path).unwrap();
    assert_eq!(load_csv(&path, Role::Test).unwrap(), test);
}

#[test]
fn four_row_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.csv");
    std::fs::write(
        &path,
        "f0,f1,y,b0\n0.5,-1,0,0\n1.5,2,0,1\n-0.25,0,1,1\n3,1e-3,1,0\n",
    )
    .unwrap();
    let ds = load_csv(&path, Role::Test).unwrap();
    assert_eq!(ds.len(), 4);
    assert_eq!(ds.n_features(), 2);
    assert_eq!(ds.n_biases(), 1);
    assert_eq!(ds.features().get(3, 1), 1e-3);
    assert_eq!(ds.group_counts(), vec![1, 1, 1, 1]);
    assert!(ds.is_conflicting(1));
    assert!(!ds.is_conflicting(2));
    let wide = load_csv_with_classes(&path, Role::Train, Some(3)).unwrap();
    assert_eq!(wide.n_classes(), 3);
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "f0,y,b0\n0.5,0,0\n1.5,0\n").unwrap();
    match load_csv(&path, Role::Train) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "f0,y,b0\nabc,0,0\n").unwrap();
    assert!(matches!(load_csv(&path, Role::Train), Err(Error::Parse { line: 2, .. })));
    std::fs::write(&path, "x0,y\n1,0\n").unwrap();
    assert!(load_csv(&path, Role::Train).is_err());
}
