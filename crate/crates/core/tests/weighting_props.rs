use echoes::weighting::{
    class_balance, class_errors, echo_update, invert, rescale_to_unit_mean, ClassErrorReport,
    WeightVector,
};
use proptest::prelude::*;

/// Weights in (0, 10] with labels over `c` classes, every class present.
fn fixture() -> impl Strategy<Value = (Vec<f64>, Vec<usize>, usize)> {
    (2usize..6).prop_flat_map(|c| {
        (c..60).prop_flat_map(move |n| {
            (
                proptest::collection::vec(1e-3f64..10.0, n),
                proptest::collection::vec(0..c, n - c),
            )
                .prop_map(move |(w, mut y)| {
                    y.extend(0..c);
                    (w, y, c)
                })
        })
    })
}

fn class_sums(w: &[f64], y: &[usize], c: usize) -> Vec<f64> {
    let mut s = vec![0.0; c];
    for (&v, &l) in w.iter().zip(y) {
        s[l] += v;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn class_balance_equalizes_sums_and_keeps_ratios((w, y, c) in fixture()) {
        let out = class_balance(&WeightVector::from_vec(w.clone()), &y, c).unwrap();
        let sums = class_sums(&out.weights, &y, c);
        for s in &sums {
            prop_assert!((s - sums[0]).abs() <= 1e-9 * sums[0].abs());
        }
        // one multiplier per class: the product of the other classes' sums
        let before = class_sums(&w, &y, c);
        for (i, (&v, &l)) in w.iter().zip(&y).enumerate() {
            let factor: f64 = (0..c).filter(|&g| g != l).map(|g| before[g]).product();
            prop_assert_eq!(out.weights[i].to_bits(), (factor * v).to_bits());
        }
    }

    #[test]
    fn rescale_gives_unit_mean((w, _y, _c) in fixture()) {
        let out = rescale_to_unit_mean(&WeightVector::from_vec(w.clone())).unwrap();
        prop_assert!((out.mean() - 1.0).abs() < 1e-12);
        let ratio = out.weights[0] / w[0];
        for (a, b) in out.weights.iter().zip(&w) {
            prop_assert!((a / b - ratio).abs() <= 1e-12 * ratio);
        }
    }

    #[test]
    fn echo_weights_are_powers_of_alpha(
        alpha in 0.05f64..=1.0,
        rounds in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 12), 1..15),
    ) {
        // labels 0/1 alternating; t_error = 1 keeps every class open
        let labels: Vec<usize> = (0..12).map(|i| i % 2).collect();
        let mut w = WeightVector::ones(12);
        let mut misses = [0i32; 12];
        for correct in &rounds {
            let report = ClassErrorReport {
                per_class_error: vec![0.0, 0.0],
                per_sample_correct: correct.clone(),
            };
            let next = echo_update(&w, &report, &labels, alpha, 1.0).unwrap();
            for i in 0..12 {
                prop_assert!(next.weights[i] <= w.weights[i]);
                if !correct[i] {
                    misses[i] += 1;
                }
            }
            w = next;
        }
        prop_assert_eq!(w.epoch_count, rounds.len());
        for i in 0..12 {
            let expected = alpha.powi(misses[i]);
            prop_assert!((w.weights[i] - expected).abs() <= 1e-12 * expected.max(1e-300));
        }
    }

    #[test]
    fn invert_twice_is_identity_below_cap(w in proptest::collection::vec(1e-3f64..1e3, 1..50)) {
        let v = WeightVector::from_vec(w.clone());
        let back = invert(&invert(&v, 1e6).unwrap(), 1e6).unwrap();
        for (a, b) in back.weights.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn invert_respects_cap(w in proptest::collection::vec(1e-9f64..1.0, 1..50), cap in 1.0f64..1e4) {
        let out = invert(&WeightVector::from_vec(w), cap).unwrap();
        prop_assert!(out.weights.iter().all(|&v| (1.0..=cap).contains(&v)));
    }

    #[test]
    fn class_errors_match_counting(
        pairs in proptest::collection::vec((0usize..3, 0usize..3), 3..80),
    ) {
        let mut labels: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let mut preds: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        labels.extend([0, 1, 2]);
        preds.extend([0, 1, 2]);
        let r = class_errors(&preds, &labels, 3).unwrap();
        for c in 0..3 {
            let total = labels.iter().filter(|&&l| l == c).count();
            let wrong = labels.iter().zip(&preds).filter(|(&l, &p)| l == c && p != l).count();
            prop_assert_eq!(r.per_class_error[c], wrong as f64 / total as f64);
        }
    }
}

#[test]
fn alpha_one_never_changes_weights() {
    let labels = vec![0, 1, 0, 1];
    let report = ClassErrorReport {
        per_class_error: vec![0.1, 0.2],
        per_sample_correct: vec![false, false, true, false],
    };
    let out = echo_update(&WeightVector::ones(4), &report, &labels, 1.0, 0.5).unwrap();
    assert_eq!(out.weights, vec![1.0; 4]);
}

#[test]
fn closed_class_keeps_its_weights() {
    let labels = vec![0, 0, 1, 1];
    let report = ClassErrorReport {
        per_class_error: vec![0.5, 0.5],
        per_sample_correct: vec![true, false, false, true],
    };
    // error equal to the threshold does not open the gate
    let out = echo_update(&WeightVector::ones(4), &report, &labels, 0.5, 0.5).unwrap();
    assert_eq!(out.weights, vec![1.0; 4]);
    let out = echo_update(&WeightVector::ones(4), &report, &labels, 0.5, 0.6).unwrap();
    assert_eq!(out.weights, vec![1.0, 0.5, 0.5, 1.0]);
}

#[test]
fn inverse_of_quarter_is_four() {
    let out = invert(&WeightVector::from_vec(vec![0.25]), 4.0).unwrap();
    assert_eq!(out.weights, vec![4.0]);
    let capped = invert(&WeightVector::from_vec(vec![0.25]), 2.0).unwrap();
    assert_eq!(capped.weights, vec![2.0]);
}
