//! Echo-chamber debiasing on synthetic multi-bias data.
//!
//! A biased auxiliary model is trained while the weights of the samples it
//! misclassifies are repeatedly decayed, so it keeps learning only the easy
//! (bias-aligned) samples. The inverse of those weights, balanced per class,
//! drives a second, target model toward the samples the biased model could
//! not fit. Baseline trainers (ERM, LfF, JTT, GroupDRO) and group-level
//! evaluation live alongside.
//!
//! Module map:
//!
//! - [`nn`]: dense rectifier networks, the two losses and Adam.
//! - [`data`]: synthetic dataset generation, alignment groups and CSV I/O.
//! - [`weighting`]: sample-weight rules (decay, inversion, balancing, LfF).
//! - [`training`]: the trainers.
//! - [`metrics`]: group accuracy, bias gaps, pseudo-label quality, curves.

pub mod data;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod training;
pub mod weighting;

pub use error::{Error, Result};
