//! End-to-end runs of the `echoes` binary on small configs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn echoes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_echoes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "dataset": {"synthetic": {"n_train": 400, "n_test": 200}},
  "runs": [
    {"config": {"method": "vanilla", "epochs": 3, "hidden_dims": [8]}, "repeats": 2},
    {"config": {"method": "echoes", "epochs": 3, "hidden_dims": [8]}, "repeats": 2}
  ],
  "output_dir": "out"
}"#;

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn generate_writes_splits_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"dataset": {"synthetic": {"n_train": 300, "n_test": 40}}}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = echoes(&["generate", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(csv_rows(&a.join("train.csv")).len(), 300);
    assert_eq!(csv_rows(&a.join("test.csv")).len(), 40);
    for f in ["train.csv", "test.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["files"][0]["rows"], 300);

    let c = tmp.path().join("c");
    echoes(&["generate", "--config", &cfg, "--seed", "5", "--out", c.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("train.csv")).unwrap(), fs::read(c.join("train.csv")).unwrap());
}

#[test]
fn invalid_inputs_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    // the test split needs a multiple of the group count
    let cfg = write_config(tmp.path(), r#"{"dataset": {"synthetic": {"n_test": 7}}}"#);
    let out = echoes(&["generate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    assert_eq!(echoes(&["train", "--method", "erm"]).status.code(), Some(2));

    let cfg = write_config(tmp.path(), r#"{"sweep": {"name": "alpha", "values": []}}"#);
    assert_eq!(echoes(&["sweep", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(tmp.path(), r#"{"runs": []}"#);
    assert_eq!(echoes(&["train", "--config", &cfg]).status.code(), Some(2));

    let missing = tmp.path().join("nope.json");
    assert_eq!(
        echoes(&["train", "--config", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn train_writes_records_summary_and_run_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("results");
    let out = echoes(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let records = csv_rows(&out_dir.join("records.csv"));
    assert_eq!(records.len(), 4);
    let summary = csv_rows(&out_dir.join("summary.csv"));
    assert_eq!(summary.len(), 2);
    assert_eq!(&summary[1][1], "echoes");
    assert_eq!(&summary[1][4], "0;1");

    let run = out_dir.join("echoes_seed1");
    for f in ["history.csv", "metrics.json", "model.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    assert!(!run.join("weights.csv").exists());
    // 3 epochs x (biased train, target train, target test) x 8 groups
    assert_eq!(csv_rows(&run.join("history.csv")).len(), 3 * 3 * 8);

    let eval_path = tmp.path().join("eval.json");
    let out = echoes(&[
        "evaluate",
        "--config",
        &cfg,
        "--model",
        run.join("model.json").to_str().unwrap(),
        "--out",
        eval_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eval: serde_json::Value = serde_json::from_slice(&fs::read(eval_path).unwrap()).unwrap();
    let metrics: serde_json::Value =
        serde_json::from_slice(&fs::read(run.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(eval["metrics"]["worst_group_acc"], metrics["worst_group_acc"]);
}

#[test]
fn method_and_seed_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("r");
    let out = echoes(&[
        "train", "--config", &cfg, "--method", "echoes", "--seed", "7", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = csv_rows(&out_dir.join("records.csv"));
    let seeds: Vec<&str> = records.iter().map(|r| &r[3]).collect();
    assert_eq!(seeds, ["7", "8"]);
    assert!(records.iter().all(|r| &r[2] == "echoes"));
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
          "dataset": {"synthetic": {"n_train": 400, "n_test": 200}},
          "runs": [{"config": {"method": "echoes", "epochs": 2, "hidden_dims": [8]}, "repeats": 1}],
          "sweep": {"name": "fraction", "values": [1.0, 0.5]},
          "weight_snapshots": true
        }"#,
    );
    let out_dir = tmp.path().join("s");
    let out = echoes(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = out_dir.join("sweep-fraction");
    assert_eq!(csv_rows(&root.join("sweep.csv")).len(), 2);
    assert_eq!(csv_rows(&root.join("sweep_summary.csv")).len(), 2);
    // half the data: 200 samples x 2 epochs of weights
    let weights = csv_rows(&root.join("value-0.5/echoes_seed0/weights.csv"));
    assert_eq!(weights.len(), 2 * 200);
}

#[test]
fn four_methods_three_seeds_give_twelve_records() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |m: &str| {
        format!(r#"{{"config": {{"method": "{m}", "epochs": 3, "hidden_dims": [8], "jtt_first_stage_epochs": 1}}, "repeats": 3}}"#)
    };
    let body = format!(
        r#"{{"dataset": {{"synthetic": {{"n_train": 400, "n_test": 200}}}}, "runs": [{}]}}"#,
        ["vanilla", "lff", "jtt", "echoes"].map(run).join(",")
    );
    let cfg = write_config(tmp.path(), &body);
    let out_dir = tmp.path().join("r");
    let out = echoes(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&out_dir.join("records.csv")).len(), 12);
    let summary = csv_rows(&out_dir.join("summary.csv"));
    assert_eq!(summary.len(), 4);
    let header = csv::Reader::from_path(out_dir.join("summary.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    for col in ["avg_group_acc_mean", "worst_group_acc_std", "gap_bias0_mean", "gap_bias1_mean", "avg_bias_gap_mean"] {
        assert!(header.iter().any(|h| h == col), "{col}");
    }
}
