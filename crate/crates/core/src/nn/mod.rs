//! Dense networks, losses and the optimizer.

mod adam;
mod loss;
mod matrix;
mod mlp;

pub use adam::{Adam, AdamConfig};
pub use loss::{gce_loss, per_sample_cross_entropy, softmax_rows, weighted_cross_entropy, LossOutput};
pub use matrix::Matrix;
pub use mlp::{ForwardTrace, Gradients, MlpModel};
