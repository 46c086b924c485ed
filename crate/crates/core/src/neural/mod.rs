//! Small neural-network substrate and the two models of the mapping loop:
//! an LSTM event classifier and a two-branch source regressor.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod metrics;
pub mod models;
pub mod tensor;
pub mod train;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, Model};
pub use gradcheck::{gradient_check, GradCheck};
pub use layers::{Dense, Lstm};
pub use metrics::{classifier_metrics, regressor_metrics, ClassifierMetrics, RegressorMetrics};
pub use models::{features, EventClassifier, Network, Normalization, SourceEstimate, SourceRegressor};
pub use tensor::Tensor2;
pub use train::{evaluate, train, Samples, TrainConfig, TrainReport};
