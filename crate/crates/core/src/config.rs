//! Experiment configuration: presets, flat TOML files and validation.
//!
//! A config file is a flat list of `key = value` lines; every key is optional and
//! overrides the chosen preset (default `mnist`). Example:
//!
//! ```toml
//! dataset = "synthetic:blobs"
//! hidden = [32, 32]
//! epochs = 5
//! batch_size = 64
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{NeuronConfig, ResetMode};
use crate::trainer::{NormBatching, TrainConfig};

pub const PRESETS: &[&str] = &["mnist", "fmnist", "kmnist", "cifar10", "nmnist", "shd"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub hidden: Vec<usize>,
    pub threshold: f64,
    pub decay: f64,
    pub learnable_decay: bool,
    pub recurrent: bool,
    pub reset: ResetMode,
    pub timesteps: usize,
    pub alpha_loss: f64,
    pub surrogate_slope: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_milestones: Vec<f64>,
    pub lr_factor: f64,
    pub seed: u64,
    pub out_dir: String,
    /// 0 evaluates only after the final epoch.
    pub eval_every: usize,
    /// Train on the first `n` samples only; 0 uses the whole training set.
    pub train_subset: usize,
    /// Evaluate on the first `n` test samples only; 0 uses the whole test set.
    pub test_subset: usize,
    pub norm_batching: NormBatching,
    /// Expected input width; 0 takes it from the dataset.
    pub input_dim: usize,
    /// Expected class count; 0 takes it from the dataset.
    pub num_classes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::preset("mnist").expect("mnist preset exists")
    }
}

impl ExperimentConfig {
    /// Ships the published hyperparameters for each dataset.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            dataset: "mnist".into(),
            hidden: vec![500, 500],
            threshold: 1.0,
            decay: 0.99,
            learnable_decay: true,
            recurrent: false,
            reset: ResetMode::Subtract,
            timesteps: 10,
            alpha_loss: 0.6,
            surrogate_slope: 2.0,
            epochs: 300,
            batch_size: 4096,
            lr: 0.001,
            lr_milestones: vec![0.5, 0.75],
            lr_factor: 0.3,
            seed: 0,
            out_dir: "runs/mnist".into(),
            eval_every: 10,
            train_subset: 0,
            test_subset: 0,
            norm_batching: NormBatching::Joint,
            input_dim: 784,
            num_classes: 10,
        };
        Ok(match name {
            "mnist" => base,
            "fmnist" => ExperimentConfig {
                dataset: "fmnist".into(),
                out_dir: "runs/fmnist".into(),
                ..base
            },
            "kmnist" => ExperimentConfig {
                dataset: "kmnist".into(),
                threshold: 1.2,
                out_dir: "runs/kmnist".into(),
                ..base
            },
            "cifar10" => ExperimentConfig {
                dataset: "cifar10".into(),
                hidden: vec![2000, 2000],
                threshold: 1.2,
                decay: 0.8,
                learnable_decay: false,
                out_dir: "runs/cifar10".into(),
                input_dim: 3072,
                ..base
            },
            "nmnist" => ExperimentConfig {
                dataset: "bse:nmnist/train.bse".into(),
                decay: 0.9,
                out_dir: "runs/nmnist".into(),
                input_dim: 2312,
                ..base
            },
            "shd" => ExperimentConfig {
                dataset: "bse:shd/train.bse".into(),
                decay: 0.9,
                threshold: 5.0,
                learnable_decay: false,
                recurrent: true,
                epochs: 500,
                out_dir: "runs/shd".into(),
                input_dim: 700,
                num_classes: 20,
                ..base
            },
            other => {
                return Err(Error::Argument(format!(
                    "unknown preset {other:?} (known: {})",
                    PRESETS.join(", ")
                )))
            }
        })
    }

    /// Parses a config file body on top of `base`; keys absent from the text keep their base value.
    pub fn parse_over(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let overrides: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
        let mut table =
            toml::Table::try_from(base).map_err(|e| Error::Config(vec![e.to_string()]))?;
        for (k, v) in overrides {
            table.insert(k, v);
        }
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
        Ok(cfg)
    }

    /// Parses a complete config; missing keys fall back to the `mnist` preset.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_over(&ExperimentConfig::default(), text)
    }

    pub fn load(path: impl AsRef<Path>, base: &ExperimentConfig) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_over(base, &text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if let Err(e) = crate::dataio::DatasetSource::parse(&self.dataset) {
            bad.push(format!("dataset: {e}"));
        }
        if self.hidden.is_empty() {
            bad.push("hidden: architecture needs at least one hidden layer".into());
        }
        if self.hidden.contains(&0) {
            bad.push(format!(
                "hidden: every layer size must be >= 1, got {:?}",
                self.hidden
            ));
        }
        if self.timesteps == 0 {
            bad.push("timesteps: must be >= 1".into());
        }
        if self.seed > i64::MAX as u64 {
            bad.push(format!("seed: must be <= {}, got {}", i64::MAX, self.seed));
        }
        if self.out_dir.is_empty() {
            bad.push("out_dir: must not be empty".into());
        }
        if self.num_classes == 1 {
            bad.push("num_classes: must be >= 2 (or 0 to take it from the dataset)".into());
        }
        if let Err(Error::Config(v)) = self.neuron().validate() {
            bad.extend(v);
        }
        if let Err(Error::Config(v)) = self.train_config().validate() {
            bad.extend(v);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn neuron(&self) -> NeuronConfig {
        NeuronConfig {
            threshold: self.threshold,
            decay: self.decay,
            learnable_decay: self.learnable_decay,
            reset: self.reset,
            surrogate_slope: self.surrogate_slope,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            lr_milestones: self.lr_milestones.clone(),
            lr_factor: self.lr_factor,
            alpha_loss: self.alpha_loss,
            seed: self.seed,
            eval_every: self.eval_every,
            norm_batching: self.norm_batching,
        }
    }
}
