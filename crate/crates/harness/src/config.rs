//! Experiment configuration files.
//!
//! A config is one JSON object; every field is optional:
//!
//! ```json
//! {
//!   "dataset": { "synthetic": { "n_train": 8000, "seed": 0 } },
//!   "runs": [
//!     { "config": { "method": "vanilla" }, "repeats": 3 },
//!     { "config": { "method": "echoes", "alpha": 0.5 }, "repeats": 3 }
//!   ],
//!   "output_dir": "results",
//!   "sweep": { "name": "alpha", "values": [0.1, 0.5, 1.0] },
//!   "pseudo_threshold": 0.5,
//!   "weight_snapshots": false
//! }
//! ```
//!
//! `dataset` may instead be `{ "csv": { "train": "train.csv", "test":
//! "test.csv" } }`; relative paths resolve against the config file. Repeat
//! `r` of a run uses seed `config.seed + r`.

use std::fmt;
use std::path::{Path, PathBuf};

use echoes::data::SyntheticSpec;
use echoes::training::{Method, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{json_at, io_at, usage, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv { train: PathBuf, test: PathBuf },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SyntheticSpec::default())
    }
}

fn default_repeats() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub config: TrainConfig,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Output name; defaults to the method name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl RunSpec {
    pub fn new(config: TrainConfig, repeats: usize) -> Self {
        Self {
            config,
            repeats,
            label: None,
        }
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.config.method.name().to_string())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.repeats as u64).map(|r| self.config.seed.wrapping_add(r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    /// Fraction of the training split kept, drawn per seed.
    Fraction,
    Lambda,
    TError,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Fraction => "fraction",
            SweepParam::Lambda => "lambda",
            SweepParam::TError => "t_error",
        }
    }

    pub fn default_grid(self) -> Option<Vec<f64>> {
        match self {
            SweepParam::Alpha => Some(vec![0.1, 0.3, 0.5, 0.7, 0.9, 1.0]),
            SweepParam::Fraction => Some(vec![1.0, 0.5, 0.2, 0.1]),
            SweepParam::Lambda | SweepParam::TError => None,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: SweepParam,
    /// Omitted: the parameter's default grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let values = match &self.values {
            Some(v) => v.clone(),
            None => self.name.default_grid().ok_or_else(|| {
                usage(format!("sweep over {} needs explicit values", self.name))
            })?,
        };
        if values.is_empty() {
            return Err(usage(format!("sweep grid for {} is empty", self.name)));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(usage(format!("sweep value {v} is not finite")));
        }
        Ok(values)
    }
}

fn default_threshold() -> f64 {
    0.5
}

fn default_runs() -> Vec<RunSpec> {
    Method::ALL
        .iter()
        .map(|&m| RunSpec::new(TrainConfig::with_method(m), default_repeats()))
        .collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: DatasetSource,
    #[serde(default = "default_runs")]
    pub runs: Vec<RunSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Echo weights below this count as flagged bias-conflicting.
    #[serde(default = "default_threshold")]
    pub pseudo_threshold: f64,
    /// Also write every epoch's sample weights per run.
    #[serde(default)]
    pub weight_snapshots: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            runs: default_runs(),
            output_dir: default_output_dir(),
            sweep: None,
            pseudo_threshold: default_threshold(),
            weight_snapshots: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a JSON config; relative CSV paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        let mut config: Self = serde_json::from_str(&text).map_err(json_at(path))?;
        if let DatasetSource::Csv { train, test } = &mut config.dataset {
            let base = path.parent().unwrap_or(Path::new(""));
            for p in [train, test] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(usage("config lists no runs"));
        }
        let mut labels = std::collections::BTreeSet::new();
        for run in &self.runs {
            run.config.validate()?;
            if run.repeats == 0 {
                return Err(usage(format!("run {} has zero repeats", run.label())));
            }
            let label = run.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return Err(usage(format!("run label `{label}` is not a valid directory name")));
            }
            if !labels.insert(label.clone()) {
                return Err(usage(format!(
                    "two runs share the label `{label}`; set distinct `label` fields"
                )));
            }
        }
        if !(self.pseudo_threshold > 0.0 && self.pseudo_threshold <= 1.0) {
            return Err(usage("pseudo_threshold must lie in (0, 1]"));
        }
        if let DatasetSource::Synthetic(spec) = &self.dataset {
            spec.validate()?;
        }
        if let Some(sweep) = &self.sweep {
            sweep.grid()?;
        }
        Ok(())
    }

    /// Applies command-line overrides. `method` keeps only the run with that
    /// method (a default one if the file has none); `seed` replaces every
    /// run's base seed.
    pub fn apply_overrides(
        &mut self,
        method: Option<Method>,
        seed: Option<u64>,
        output_dir: Option<PathBuf>,
    ) {
        if let Some(m) = method {
            let kept = self
                .runs
                .iter()
                .find(|r| r.config.method == m)
                .cloned()
                .unwrap_or_else(|| RunSpec::new(TrainConfig::with_method(m), default_repeats()));
            self.runs = vec![kept];
        }
        if let Some(s) = seed {
            self.runs.iter_mut().for_each(|r| r.config.seed = s);
        }
        if let Some(dir) = output_dir {
            self.output_dir = dir;
        }
    }

    /// Short SHA-256 of everything that determines results; the output
    /// directory is left out so relocated runs hash the same.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}
