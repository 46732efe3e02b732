//! Forward-Forward training for spiking neural networks.
//!
//! Layers of leaky integrate-and-fire neurons are trained one at a time, without
//! backpropagation between layers. Each layer learns to give many spikes to inputs
//! carrying their true label (positive samples) and few spikes to inputs carrying a
//! wrong, hard-to-reject label (negative samples). A sample is classified by trying
//! every label and picking the one with the largest total spike goodness.
//!
//! ```no_run
//! use snnff::{config::ExperimentConfig, experiment};
//!
//! let cfg = ExperimentConfig {
//!     dataset: "synthetic:blobs".into(),
//!     hidden: vec![32, 32],
//!     epochs: 5,
//!     batch_size: 64,
//!     input_dim: 0,
//!     num_classes: 0,
//!     ..ExperimentConfig::default()
//! };
//! let summary = experiment::run_train(&cfg)?;
//! println!("test accuracy {:?}", summary.final_test_accuracy);
//! # Ok::<(), snnff::Error>(())
//! ```

pub mod config;
pub mod dataio;
mod error;
pub mod experiment;
pub mod layer;
pub mod network;
pub mod neuron;
pub mod numerics;
pub mod predictor;
pub mod trainer;

pub use error::{Error, Result};
pub use layer::{layer_backward, layer_forward, LayerInput, Mode, SpikingLayer};
pub use network::FFNetwork;
pub use neuron::{NeuronConfig, ResetMode};
pub use numerics::{Matrix, RngStream};
pub use trainer::{NormBatching, TrainConfig};
