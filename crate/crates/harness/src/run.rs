//! Running experiments and writing their artifacts.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use echoes::data::{generate, load_csv, LabeledDataset, Role};
use echoes::metrics::{
    avg_bias_gap, bias_gaps, group_accuracy, pseudo_label_quality, GroupHistory, HistoryRow,
};
use echoes::nn::MlpModel;
use echoes::training::{train, EpochObserver, EpochSnapshot, Method, TrainConfig, TrainResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{DatasetSource, ExperimentConfig, SweepParam};
use crate::error::{io_at, json_at, usage, Result};
use crate::records::{
    record_fields, record_header, summarize, summary_fields, summary_header, MetricRecord,
    SummaryRow,
};

pub struct Datasets {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

pub fn load_datasets(source: &DatasetSource) -> Result<Datasets> {
    let (train, test) = match source {
        DatasetSource::Synthetic(spec) => generate(spec)?,
        DatasetSource::Csv { train, test } => {
            let tr = load_csv(train, Role::Train)?;
            let te = echoes::data::load_csv_with_classes(test, Role::Test, Some(tr.n_classes()))?;
            (tr, te)
        }
    };
    if train.n_biases() != test.n_biases() || train.n_features() != test.n_features() {
        return Err(usage("train and test sets disagree in feature or bias count"));
    }
    Ok(Datasets { train, test })
}

/// One epoch's sample weights.
#[derive(Clone, Debug)]
pub struct WeightSnapshot {
    pub epoch: usize,
    pub biased: Option<Vec<f64>>,
    pub debiased: Option<Vec<f64>>,
}

struct RunObserver<'a> {
    history: GroupHistory<'a>,
    snapshots: Option<Vec<WeightSnapshot>>,
}

impl EpochObserver for RunObserver<'_> {
    fn on_epoch(&mut self, snap: &EpochSnapshot<'_>) -> echoes::Result<()> {
        self.history.on_epoch(snap)?;
        if let Some(s) = &mut self.snapshots {
            s.push(WeightSnapshot {
                epoch: snap.log.epoch,
                biased: snap.biased_weights.map(|w| w.weights.clone()),
                debiased: snap.debiased_weights.map(|w| w.weights.clone()),
            });
        }
        Ok(())
    }
}

/// Everything one (run, seed) produces.
pub struct RunOutcome {
    pub record: MetricRecord,
    pub result: TrainResult,
    pub history: Vec<HistoryRow>,
    pub snapshots: Option<Vec<WeightSnapshot>>,
}

/// Test-set metrics of a trained target (and optional biased) model.
pub fn evaluate_models(
    target: &MlpModel,
    biased: Option<&MlpModel>,
    test: &LabeledDataset,
) -> Result<(MetricRecordParts, Option<f64>)> {
    let metrics = group_accuracy(target, test)?;
    let parts = MetricRecordParts {
        avg_group_acc: metrics.avg_group_acc,
        worst_group_acc: metrics.worst_group_acc,
        bias_gaps: bias_gaps(&metrics)?,
        avg_bias_gap: avg_bias_gap(&metrics)?,
        per_group_acc: metrics
            .per_group_acc
            .iter()
            .map(|(g, a)| (g.to_string(), *a))
            .collect(),
    };
    let biased_aligned = match biased {
        Some(m) => group_accuracy(m, test)?.aligned_acc(),
        None => None,
    };
    Ok((parts, biased_aligned))
}

/// Model-derived part of a [`MetricRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecordParts {
    pub avg_group_acc: f64,
    pub worst_group_acc: f64,
    pub bias_gaps: Vec<f64>,
    pub avg_bias_gap: f64,
    pub per_group_acc: std::collections::BTreeMap<String, f64>,
}

pub struct RunRequest<'a> {
    pub label: &'a str,
    pub config: TrainConfig,
    pub config_hash: &'a str,
    pub pseudo_threshold: f64,
    pub weight_snapshots: bool,
}

pub fn execute_run(train_set: &LabeledDataset, test: &LabeledDataset, req: &RunRequest<'_>) -> Result<RunOutcome> {
    let mut observer = RunObserver {
        history: GroupHistory::new(train_set, Some(test)),
        snapshots: req.weight_snapshots.then(Vec::new),
    };
    let result = train(train_set, &req.config, &mut observer)?;
    let (parts, biased_aligned_acc) =
        evaluate_models(&result.target_model, result.biased_model.as_ref(), test)?;
    let pseudo = match (&result.final_biased_weights, result.method) {
        (Some(w), Method::Echoes) => Some(pseudo_label_quality(w, train_set, req.pseudo_threshold)?),
        _ => None,
    };
    let record = MetricRecord {
        config_hash: req.config_hash.to_string(),
        label: req.label.to_string(),
        method: req.config.method,
        seed: req.config.seed,
        avg_group_acc: parts.avg_group_acc,
        worst_group_acc: parts.worst_group_acc,
        bias_gaps: parts.bias_gaps,
        avg_bias_gap: parts.avg_bias_gap,
        pseudo_f1: pseudo.map(|p| p.f1),
        pseudo_flagged: pseudo.map(|p| p.flagged),
        biased_aligned_acc,
        per_group_acc: parts.per_group_acc,
        warnings: result.warnings.clone(),
    };
    Ok(RunOutcome {
        record,
        result,
        history: observer.history.into_rows(),
        snapshots: observer.snapshots,
    })
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_at(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_at(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(io_at(path))?;
    Ok(csv::Writer::from_writer(file))
}

fn opt(v: Option<f64>) -> String {
    crate::records::fmt_opt(v)
}

#[derive(Serialize, Deserialize)]
pub struct SavedModels {
    pub config_hash: String,
    pub seed: u64,
    pub label: String,
    pub method: Method,
    pub target_model: MlpModel,
    pub biased_model: Option<MlpModel>,
}

/// Writes `history.csv`, `metrics.json`, `model.json` and, if recorded,
/// `weights.csv` into `dir`.
pub fn write_run(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let rec = &outcome.record;
    let seed = rec.seed.to_string();

    let mut w = csv_writer(&dir.join("history.csv"))?;
    w.write_record([
        "config_hash",
        "seed",
        "epoch",
        "split",
        "group",
        "error_rate",
        "mean_weight_aligned",
        "mean_weight_conflicting",
        "loss_biased",
        "loss_debiased",
    ])?;
    for row in &outcome.history {
        w.write_record([
            rec.config_hash.clone(),
            seed.clone(),
            row.epoch.to_string(),
            row.split.name().to_string(),
            row.group.to_string(),
            row.error_rate.to_string(),
            opt(row.mean_weight_aligned),
            opt(row.mean_weight_conflicting),
            opt(row.loss_biased),
            opt(row.loss_debiased),
        ])?;
    }
    w.flush().map_err(io_at(dir))?;

    write_json(&dir.join("metrics.json"), rec)?;
    write_json(
        &dir.join("model.json"),
        &SavedModels {
            config_hash: rec.config_hash.clone(),
            seed: rec.seed,
            label: rec.label.clone(),
            method: rec.method,
            target_model: outcome.result.target_model.clone(),
            biased_model: outcome.result.biased_model.clone(),
        },
    )?;

    if let Some(snaps) = &outcome.snapshots {
        let mut w = csv_writer(&dir.join("weights.csv"))?;
        w.write_record([
            "config_hash",
            "seed",
            "epoch",
            "sample_index",
            "biased_weight",
            "debiased_weight",
        ])?;
        for s in snaps {
            let n = s
                .biased
                .as_ref()
                .or(s.debiased.as_ref())
                .map_or(0, Vec::len);
            for i in 0..n {
                w.write_record([
                    rec.config_hash.clone(),
                    seed.clone(),
                    s.epoch.to_string(),
                    i.to_string(),
                    opt(s.biased.as_ref().map(|b| b[i])),
                    opt(s.debiased.as_ref().map(|d| d[i])),
                ])?;
            }
        }
        w.flush().map_err(io_at(dir))?;
    }
    Ok(())
}

fn write_records(path: &Path, records: &[MetricRecord], prefix: Option<(&str, f64)>) -> Result<()> {
    let n_biases = records.first().map_or(0, |r| r.bias_gaps.len());
    let mut w = csv_writer(path)?;
    let mut header = record_header(n_biases);
    if prefix.is_some() {
        header.insert(0, "value".into());
        header.insert(0, "parameter".into());
    }
    w.write_record(&header)?;
    for r in records {
        let mut f = record_fields(r);
        if let Some((name, v)) = prefix {
            f.insert(0, v.to_string());
            f.insert(0, name.to_string());
        }
        w.write_record(&f)?;
    }
    w.flush().map_err(io_at(path))
}

fn write_summary_rows(w: &mut csv::Writer<File>, rows: &[SummaryRow], prefix: Option<(&str, f64)>) -> Result<()> {
    for s in rows {
        let mut f = summary_fields(s);
        if let Some((name, v)) = prefix {
            f.insert(0, v.to_string());
            f.insert(0, name.to_string());
        }
        w.write_record(&f)?;
    }
    Ok(())
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let n_biases = rows.first().map_or(0, |r| r.bias_gaps.len());
    let mut w = csv_writer(path)?;
    w.write_record(summary_header(n_biases))?;
    write_summary_rows(&mut w, rows, None)?;
    w.flush().map_err(io_at(path))
}

/// Records and per-label summary of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub records: Vec<MetricRecord>,
    pub summary: Vec<SummaryRow>,
}

struct Job {
    label: String,
    config: TrainConfig,
}

fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    config
        .runs
        .iter()
        .flat_map(|run| {
            let label = run.label();
            run.seeds().map(move |seed| Job {
                label: label.clone(),
                config: TrainConfig {
                    seed,
                    ..run.config.clone()
                },
            })
        })
        .collect()
}

/// Trains every job in parallel and writes per-run artifacts under `dir`.
/// `fraction` subsamples the training split per seed.
fn run_jobs(
    config: &ExperimentConfig,
    data: &Datasets,
    jobs: &[Job],
    hash: &str,
    dir: &Path,
    fraction: Option<f64>,
) -> Result<Vec<MetricRecord>> {
    jobs.par_iter()
        .map(|job| {
            let subsampled;
            let train_set = match fraction {
                Some(f) => {
                    subsampled = data.train.subsample(f, job.config.seed)?;
                    &subsampled
                }
                None => &data.train,
            };
            let req = RunRequest {
                label: &job.label,
                config: job.config.clone(),
                config_hash: hash,
                pseudo_threshold: config.pseudo_threshold,
                weight_snapshots: config.weight_snapshots,
            };
            let outcome = execute_run(train_set, &data.test, &req)?;
            write_run(&dir.join(format!("{}_seed{}", job.label, job.config.seed)), &outcome)?;
            Ok(outcome.record)
        })
        .collect()
}

fn write_config(dir: &Path, config: &ExperimentConfig, hash: &str) -> Result<()> {
    #[derive(Serialize)]
    struct Resolved<'a> {
        config_hash: &'a str,
        config: &'a ExperimentConfig,
    }
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    write_json(&dir.join("config.json"), &Resolved { config_hash: hash, config: &c })
}

/// Runs every configured (run, seed) and writes `records.*` and
/// `summary.*` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let hash = config.hash();
    let data = load_datasets(&config.dataset)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    write_config(dir, config, &hash)?;
    let records = run_jobs(config, &data, &jobs(config), &hash, dir, None)?;
    let summary = summarize(&records);
    write_records(&dir.join("records.csv"), &records, None)?;
    write_summary(&dir.join("summary.csv"), &summary)?;
    let report = ExperimentReport {
        config_hash: hash,
        records,
        summary,
    };
    write_json(&dir.join("records.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub records: Vec<MetricRecord>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub config_hash: String,
    pub parameter: SweepParam,
    pub points: Vec<SweepPoint>,
}

fn apply_sweep(config: &TrainConfig, param: SweepParam, value: f64) -> TrainConfig {
    let mut c = config.clone();
    match param {
        SweepParam::Alpha => c.alpha = value,
        SweepParam::Lambda => c.lambda = value,
        SweepParam::TError => c.t_error = value,
        SweepParam::Fraction => {}
    }
    c
}

/// Runs the experiment once per grid value, under `sweep-{name}/value-{v}`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| usage("config has no `sweep` section"))?;
    let grid = sweep.grid()?;
    let param = sweep.name;
    let hash = config.hash();
    let data = load_datasets(&config.dataset)?;
    let root = config.output_dir.join(format!("sweep-{param}"));
    fs::create_dir_all(&root).map_err(io_at(&root))?;
    write_config(&root, config, &hash)?;

    let mut points = Vec::with_capacity(grid.len());
    for &value in &grid {
        let mut point_config = config.clone();
        for run in &mut point_config.runs {
            run.config = apply_sweep(&run.config, param, value);
        }
        point_config.validate()?;
        let fraction = (param == SweepParam::Fraction).then_some(value);
        let dir = root.join(format!("value-{value}"));
        fs::create_dir_all(&dir).map_err(io_at(&dir))?;
        let records = run_jobs(&point_config, &data, &jobs(&point_config), &hash, &dir, fraction)?;
        let summary = summarize(&records);
        points.push(SweepPoint {
            value,
            records,
            summary,
        });
    }

    let all: Vec<&MetricRecord> = points.iter().flat_map(|p| &p.records).collect();
    let n_biases = all.first().map_or(0, |r| r.bias_gaps.len());
    let path = root.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    let mut header = record_header(n_biases);
    header.splice(0..0, ["parameter".to_string(), "value".to_string()]);
    w.write_record(&header)?;
    for p in &points {
        for r in &p.records {
            let mut f = record_fields(r);
            f.splice(0..0, [param.name().to_string(), p.value.to_string()]);
            w.write_record(&f)?;
        }
    }
    w.flush().map_err(io_at(&path))?;

    let path = root.join("sweep_summary.csv");
    let mut w = csv_writer(&path)?;
    let mut header = summary_header(n_biases);
    header.splice(0..0, ["parameter".to_string(), "value".to_string()]);
    w.write_record(&header)?;
    for p in &points {
        write_summary_rows(&mut w, &p.summary, Some((param.name(), p.value)))?;
    }
    w.flush().map_err(io_at(&path))?;

    let report = SweepReport {
        config_hash: hash,
        parameter: param,
        points,
    };
    write_json(&root.join("sweep.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub spec: echoes::data::SyntheticSpec,
    pub files: Vec<FileDigest>,
}

/// Writes the synthetic train/test splits as CSV plus a `manifest.json`
/// with row counts and content digests.
pub fn generate_dataset(config: &ExperimentConfig, seed: Option<u64>) -> Result<Manifest> {
    let DatasetSource::Synthetic(spec) = &config.dataset else {
        return Err(usage("generate needs a synthetic dataset source"));
    };
    let mut spec = spec.clone();
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    let mut hashed = config.clone();
    hashed.dataset = DatasetSource::Synthetic(spec.clone());
    let hash = hashed.hash();
    let (train_set, test) = generate(&spec)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let mut files = Vec::new();
    for (name, ds) in [("train.csv", &train_set), ("test.csv", &test)] {
        let path = dir.join(name);
        echoes::data::save_csv(ds, &path)?;
        let bytes = fs::read(&path).map_err(io_at(&path))?;
        files.push(FileDigest {
            file: name.to_string(),
            rows: ds.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        config_hash: hash,
        seed: spec.seed,
        spec,
        files,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub config_hash: String,
    pub label: String,
    pub method: Method,
    pub seed: u64,
    pub metrics: MetricRecordParts,
    pub biased_aligned_acc: Option<f64>,
}

/// Scores a saved `model.json` on the config's test split.
pub fn evaluate_saved(config: &ExperimentConfig, model_path: &Path) -> Result<Evaluation> {
    let text = fs::read_to_string(model_path).map_err(io_at(model_path))?;
    let saved: SavedModels = serde_json::from_str(&text).map_err(json_at(model_path))?;
    let data = load_datasets(&config.dataset)?;
    let (metrics, biased_aligned_acc) =
        evaluate_models(&saved.target_model, saved.biased_model.as_ref(), &data.test)?;
    Ok(Evaluation {
        config_hash: saved.config_hash,
        label: saved.label,
        method: saved.method,
        seed: saved.seed,
        metrics,
        biased_aligned_acc,
    })
}

/// Writes `evaluation.json` to `path`.
pub fn write_evaluation(path: &Path, eval: &Evaluation) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_at(parent))?;
    }
    write_json(path, eval)
}

/// Prints a compact table of a summary to `out`.
pub fn print_summary(out: &mut impl Write, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(out, "{:<16} {:>6} {:>16} {:>16} {:>16}", "label", "runs", "avg_group_acc", "worst_group_acc", "avg_bias_gap")?;
    for r in rows {
        let cell = |s: &crate::records::Stat| match s.std {
            Some(sd) => format!("{:.3} ± {:.3}", s.mean, sd),
            None => format!("{:.3}", s.mean),
        };
        writeln!(
            out,
            "{:<16} {:>6} {:>16} {:>16} {:>16}",
            r.label,
            r.seeds.len(),
            cell(&r.avg_group_acc),
            cell(&r.worst_group_acc),
            cell(&r.avg_bias_gap)
        )?;
    }
    Ok(())
}
