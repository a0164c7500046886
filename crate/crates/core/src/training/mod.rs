//! Dataset generation and storage, the composite loss, Adam training,
//! evaluation metrics and field maps.

pub mod adam;
pub mod dataset;
pub mod evaluate;
mod io;
pub mod loss;
pub mod maps;
pub mod model;
pub mod train;

pub use dataset::{generate_dataset, Dataset, DatasetConfig, Downsample, Sample};
pub use evaluate::{evaluate, EvalReport, SampleMetrics};
pub use loss::{LossConfig, LossReport};
pub use model::FnoModel;
pub use train::{evaluate_losses, train, write_history_csv, EpochRecord, TrainConfig};
