//! Feedforward sigmoid networks: float training, fixed-point quantization and
//! store-routed inference.

mod dataset;
mod network;
mod quant;
mod store;
mod train;

pub use dataset::{ClassCount, Dataset, EvalResult, Split};
pub use network::{init_network, sigmoid, FloatNetwork, NetworkArch};
pub use quant::{evaluate, quantize, FixedPointFormat, QuantBank, QuantizedNetwork};
pub use store::WeightStore;
pub use train::{backprop, train_backprop, train_on_targets, Gradients, TrainParams};
