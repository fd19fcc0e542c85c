use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vanilla,
    Echoes,
    Lff,
    Jtt,
    #[serde(rename = "groupdro")]
    GroupDro,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Vanilla,
        Method::Echoes,
        Method::Lff,
        Method::Jtt,
        Method::GroupDro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::Echoes => "echoes",
            Method::Lff => "lff",
            Method::Jtt => "jtt",
            Method::GroupDro => "groupdro",
        }
    }

    /// Whether the trainer reads bias labels.
    pub fn is_supervised(self) -> bool {
        self == Method::GroupDro
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown method `{s}` (expected one of vanilla, echoes, lff, jtt, groupdro)"
                ))
            })
    }
}

/// Hyperparameters shared by all trainers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub method: Method,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Decay factor for misclassified samples of the biased model.
    pub alpha: f64,
    /// Weight of the target-model term in the joint loss.
    pub lambda: f64,
    /// Classes at or above this training error are not decayed.
    pub t_error: f64,
    /// GCE exponent for the LfF biased model.
    pub q: f64,
    pub jtt_first_stage_epochs: usize,
    pub jtt_upweight: f64,
    pub groupdro_step: f64,
    pub hidden_dims: Vec<usize>,
    pub seed: u64,
    /// Upper bound on inverted weights. Raw inverses grow like
    /// `alpha^-epochs`; without a moderate bound the few samples the biased
    /// model always misses dominate the target loss.
    pub inversion_cap: f64,
    /// Rescale balanced target weights to mean one.
    pub rescale_debiased: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Echoes,
            epochs: 100,
            batch_size: 256,
            lr: 3e-4,
            alpha: 0.5,
            lambda: 1000.0,
            t_error: 0.5,
            q: 0.7,
            jtt_first_stage_epochs: 2,
            jtt_upweight: 20.0,
            groupdro_step: 0.01,
            hidden_dims: vec![128],
            seed: 0,
            inversion_cap: 256.0,
            rescale_debiased: true,
        }
    }
}

impl TrainConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn layer_dims(&self, n_features: usize, n_classes: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(n_features);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(n_classes);
        dims
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::config("lr must be positive"));
        }
        if !in_unit(self.alpha) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !in_unit(self.t_error) {
            return Err(Error::config(format!(
                "t_error must lie in (0, 1], got {}",
                self.t_error
            )));
        }
        if !in_unit(self.q) {
            return Err(Error::config(format!("q must lie in (0, 1], got {}", self.q)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("lambda must be non-negative"));
        }
        if !(self.jtt_upweight.is_finite() && self.jtt_upweight > 0.0) {
            return Err(Error::config("jtt_upweight must be positive"));
        }
        if !(self.groupdro_step.is_finite() && self.groupdro_step >= 0.0) {
            return Err(Error::config("groupdro_step must be non-negative"));
        }
        if !(self.inversion_cap >= 1.0) {
            return Err(Error::config("inversion_cap must be at least 1"));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::config("hidden layer widths must be positive"));
        }
        Ok(())
    }
}
