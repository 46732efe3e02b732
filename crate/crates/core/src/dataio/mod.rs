//! Dataset ingestion, scaling and label embedding.
//!
//! Every sample is stored as one flat row. Static samples have `timesteps == 1` and
//! `input_dim` columns; temporal samples hold `timesteps * input_dim` columns laid out
//! timestep-major, so timestep `t` occupies columns `t*d..(t+1)*d`.

mod bse;
mod cifar;
mod embed;
mod idx;
pub mod synthetic;

use std::path::{Path, PathBuf};

pub use bse::{load_binned_events, write_binned_events, BSE_MAGIC};
pub use cifar::load_cifar10;
pub use embed::{embed_label, make_negative, make_positive, LabeledVariant, Polarity};
pub use idx::{load_idx, load_idx_with_classes, write_idx_images, write_idx_labels};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

/// A fully loaded, immutable dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub input_dim: usize,
    pub temporal: bool,
    pub timesteps: usize,
}

impl Dataset {
    pub fn new(
        inputs: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        input_dim: usize,
        temporal: bool,
        timesteps: usize,
    ) -> Result<Self> {
        let ds = Dataset {
            inputs,
            labels,
            num_classes,
            input_dim,
            temporal,
            timesteps,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn static_images(inputs: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let d = inputs.cols();
        Self::new(inputs, labels, num_classes, d, false, 1)
    }

    fn validate(&self) -> Result<()> {
        if self.inputs.rows() != self.labels.len() {
            return Err(Error::Argument(format!(
                "{} input rows but {} labels",
                self.inputs.rows(),
                self.labels.len()
            )));
        }
        if self.timesteps == 0 || (!self.temporal && self.timesteps != 1) {
            return Err(Error::Argument(format!(
                "static datasets have exactly one timestep, got {}",
                self.timesteps
            )));
        }
        if self.inputs.cols() != self.timesteps * self.input_dim {
            return Err(Error::Argument(format!(
                "row width {} != timesteps {} x input dim {}",
                self.inputs.cols(),
                self.timesteps,
                self.input_dim
            )));
        }
        if self.input_dim < self.num_classes {
            return Err(Error::Argument(format!(
                "input dim {} is smaller than the class count {}; labels cannot be embedded",
                self.input_dim, self.num_classes
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.num_classes) {
            return Err(Error::Argument(format!(
                "label {bad} out of range for {} classes",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn batch(&self, indices: &[usize]) -> SampleBatch {
        SampleBatch {
            inputs: self.inputs.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            input_dim: self.input_dim,
            timesteps: self.timesteps,
        }
    }

    /// The whole dataset as a single batch.
    pub fn as_batch(&self) -> SampleBatch {
        SampleBatch {
            inputs: self.inputs.clone(),
            labels: self.labels.clone(),
            input_dim: self.input_dim,
            timesteps: self.timesteps,
        }
    }

    /// First `n` samples (or all of them when `n >= len`).
    pub fn take(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let b = self.batch(indices);
        Dataset {
            inputs: b.inputs,
            labels: b.labels,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Dataset {
        Dataset {
            inputs: Matrix::zeros(0, self.inputs.cols()),
            labels: Vec::new(),
            num_classes: self.num_classes,
            input_dim: self.input_dim,
            temporal: self.temporal,
            timesteps: self.timesteps,
        }
    }

    /// Shuffled mini-batch index lists for one epoch. The last batch may be short.
    pub fn epoch_batches(&self, batch_size: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
        let perm = rng.permutation(self.len());
        perm.chunks(batch_size.max(1))
            .map(<[usize]>::to_vec)
            .collect()
    }
}

/// A mini-batch of flattened samples with their true labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
    pub input_dim: usize,
    pub timesteps: usize,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Global min-max scaling into `[0, 1]`. Data already inside `[0, 1]` is left as is;
/// a constant dataset maps to all zeros.
pub fn scale_to_unit(dataset: &Dataset) -> Dataset {
    let lo = dataset.inputs.min();
    let hi = dataset.inputs.max();
    let mut out = dataset.clone();
    if dataset.inputs.data().is_empty() {
        return out;
    }
    if hi <= lo {
        log::warn!("scale_to_unit: constant dataset (value {lo}); returning zeros");
        out.inputs.fill(0.0);
        return out;
    }
    if lo >= 0.0 && hi <= 1.0 {
        return out;
    }
    let span = hi - lo;
    out.inputs = dataset.inputs.map(|x| (x - lo) / span);
    out
}

/// Named dataset sources accepted on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetSource {
    Mnist,
    FashionMnist,
    KuzushijiMnist,
    Cifar10,
    /// A BSE1 file; `<path>` for training, and `<stem>.test.bse` next to it for testing if present.
    /// Relative paths that do not exist from the working directory are looked up under the data root.
    Bse(PathBuf),
    Synthetic(String),
}

impl DatasetSource {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "mnist" => DatasetSource::Mnist,
            "fmnist" => DatasetSource::FashionMnist,
            "kmnist" => DatasetSource::KuzushijiMnist,
            "cifar10" => DatasetSource::Cifar10,
            _ => {
                if let Some(p) = id.strip_prefix("bse:") {
                    DatasetSource::Bse(PathBuf::from(p))
                } else if let Some(g) = id.strip_prefix("synthetic:") {
                    if !synthetic::GENERATORS.contains(&g) {
                        return Err(Error::Argument(format!(
                            "unknown synthetic generator {g:?} (known: {})",
                            synthetic::GENERATORS.join(", ")
                        )));
                    }
                    DatasetSource::Synthetic(g.to_string())
                } else {
                    return Err(Error::Argument(format!(
                        "unknown dataset {id:?}; expected mnist | fmnist | kmnist | cifar10 | bse:<path> | synthetic:<generator>"
                    )));
                }
            }
        })
    }

    /// Loads the (train, test) pair. `data_root` holds one subdirectory per image dataset.
    pub fn load(&self, data_root: &Path, seed: u64) -> Result<(Dataset, Dataset)> {
        let idx_pair = |dir: &str| -> Result<(Dataset, Dataset)> {
            let base = data_root.join(dir);
            let train = load_idx(
                base.join("train-images-idx3-ubyte"),
                base.join("train-labels-idx1-ubyte"),
            )
            .map_err(|e| with_hint(e, data_root))?;
            let test = load_idx(
                base.join("t10k-images-idx3-ubyte"),
                base.join("t10k-labels-idx1-ubyte"),
            )
            .map_err(|e| with_hint(e, data_root))?;
            Ok((train, test))
        };
        match self {
            DatasetSource::Mnist => idx_pair("mnist"),
            DatasetSource::FashionMnist => idx_pair("fmnist"),
            DatasetSource::KuzushijiMnist => idx_pair("kmnist"),
            DatasetSource::Cifar10 => {
                load_cifar10(&data_root.join("cifar10")).map_err(|e| with_hint(e, data_root))
            }
            DatasetSource::Bse(path) => {
                let path = if path.is_relative() && !path.exists() {
                    data_root.join(path)
                } else {
                    path.clone()
                };
                let train = load_binned_events(&path).map_err(|e| with_hint(e, data_root))?;
                let test_path = path.with_extension("test.bse");
                let test = if test_path.exists() {
                    load_binned_events(&test_path)?
                } else {
                    train.clone()
                };
                Ok((train, test))
            }
            DatasetSource::Synthetic(name) => synthetic::generate(name, seed),
        }
    }
}

fn with_hint(err: Error, data_root: &Path) -> Error {
    match err {
        Error::Io { path, source, .. } => Error::Io {
            path,
            source,
            hint: format!(
                " (looked under data root {}; set SNNFF_DATA_ROOT to override)",
                data_root.display()
            ),
        },
        other => other,
    }
}
