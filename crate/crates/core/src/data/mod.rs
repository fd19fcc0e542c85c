//! Synthetic multi-bias datasets, alignment groups and CSV persistence.

mod csv_io;
mod dataset;
mod group;
mod synthetic;

pub use csv_io::{load_csv, load_csv_with_classes, save_csv};
pub use dataset::{LabeledDataset, Role, TrainView};
pub use group::{Alignment, AlignmentPattern, GroupId};
pub use synthetic::{generate, SyntheticSpec};
