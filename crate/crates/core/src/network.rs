//! Stack of spiking layers and its checkpoint format.
//!
//! Checkpoint layout (all integers little-endian):
//!
//! ```text
//! "SFFC"                magic, 4 bytes
//! version               u32 (currently 1)
//! header_len            u32
//! header                header_len bytes of UTF-8 JSON: network shape, per-layer neuron
//!                       config and flags, and the ordered tensor table {name, rows, cols}
//! tensor data           for each table entry, rows*cols f64 values, row-major
//! ```

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layer::{goodness_of_counts, LayerForwardTrace, LayerInput, Mode, SpikingLayer};
use crate::neuron::{NeuronConfig, RecurrentWeights};
use crate::numerics::{Matrix, RngStream};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SFFC";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Counts sample-label variants pushed through eval-mode forwards.
#[derive(Debug, Default)]
pub struct PassCounter(AtomicU64);

impl PassCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

impl Clone for PassCounter {
    fn clone(&self) -> Self {
        PassCounter(AtomicU64::new(self.get()))
    }
}

/// Fully connected spiking network without an output layer.
#[derive(Clone, Debug)]
pub struct FFNetwork {
    pub layers: Vec<SpikingLayer>,
    pub num_classes: usize,
    pub input_dim: usize,
    pub timesteps: usize,
    pub eval_passes: PassCounter,
}

impl FFNetwork {
    pub fn new(
        input_dim: usize,
        hidden: &[usize],
        num_classes: usize,
        timesteps: usize,
        neuron: NeuronConfig,
        recurrent: bool,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Argument(format!(
                "hidden layer sizes must be a nonempty list of positive counts, got {hidden:?}"
            )));
        }
        if input_dim < num_classes {
            return Err(Error::Argument(format!(
                "input dim {input_dim} < class count {num_classes}"
            )));
        }
        let mut layers = Vec::with_capacity(hidden.len());
        let mut fan_in = input_dim;
        for (i, &n) in hidden.iter().enumerate() {
            let mut layer = SpikingLayer::new(fan_in, n, timesteps, neuron, recurrent, rng);
            layer.set_index(i);
            layers.push(layer);
            fan_in = n;
        }
        Ok(FFNetwork {
            layers,
            num_classes,
            input_dim,
            timesteps,
            eval_passes: PassCounter::default(),
        })
    }

    /// Builds a network from ready-made layers, checking that dimensions chain.
    pub fn from_layers(
        layers: Vec<SpikingLayer>,
        num_classes: usize,
        input_dim: usize,
    ) -> Result<Self> {
        let timesteps = layers.first().map_or(0, SpikingLayer::timesteps);
        let mut fan_in = input_dim;
        for (i, l) in layers.iter().enumerate() {
            if l.inputs() != fan_in || l.timesteps() != timesteps {
                return Err(Error::Argument(format!(
                    "layer {i} expects {} inputs over {} steps, previous stage gives {fan_in} over {timesteps}",
                    l.inputs(),
                    l.timesteps()
                )));
            }
            fan_in = l.outputs();
        }
        if layers.is_empty() {
            return Err(Error::Argument("network needs at least one layer".into()));
        }
        Ok(FFNetwork {
            layers,
            num_classes,
            input_dim,
            timesteps,
            eval_passes: PassCounter::default(),
        })
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(SpikingLayer::outputs).collect()
    }

    pub fn stats_populated(&self) -> bool {
        self.layers.iter().all(|l| l.stats_populated)
    }

    /// Train-mode forward through every layer; layer k sees layer k-1's spikes.
    pub fn forward_train(&mut self, input: &LayerInput) -> Result<Vec<LayerForwardTrace>> {
        let mut traces = Vec::with_capacity(self.layers.len());
        let mut cur = input.clone();
        for layer in &mut self.layers {
            let tr = layer.forward(&cur, Mode::Train)?;
            cur = tr.output();
            traces.push(tr);
        }
        Ok(traces)
    }

    /// Eval-mode per-layer goodness: `out[layer][sample]`.
    pub fn eval_goodness(&self, input: &LayerInput) -> Result<Vec<Vec<f64>>> {
        self.eval_passes.add(input.batch_size() as u64);
        let mut cur = input.clone();
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, counts) = layer.forward_eval_light(&cur)?;
            out.push(goodness_of_counts(&counts).per_sample);
            cur = next;
        }
        Ok(out)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.parameter_counts())
            .map(|(_, n)| n)
            .sum()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut header = CheckpointHeader {
            num_classes: self.num_classes,
            input_dim: self.input_dim,
            timesteps: self.timesteps,
            layers: Vec::new(),
            tensors: Vec::new(),
        };
        let mut payload: Vec<&Matrix> = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            header.layers.push(LayerHeader {
                inputs: l.inputs(),
                outputs: l.outputs(),
                neuron: l.neuron,
                recurrent: l.recurrent.is_some(),
                stats_populated: l.stats_populated,
            });
            let mut tensors: Vec<(&str, &Matrix)> = vec![
                ("weights", &l.weights),
                ("norm_scale", &l.norm_scale),
                ("norm_shift", &l.norm_shift),
                ("running_mean", &l.running_mean),
                ("running_var", &l.running_var),
                ("decay_raw", &l.decay_raw),
            ];
            if let Some(r) = &l.recurrent {
                tensors.push(("recurrent", &r.weights));
            }
            for (name, t) in tensors {
                header.tensors.push(TensorHeader {
                    name: format!("layer{i}.{name}"),
                    rows: t.rows(),
                    cols: t.cols(),
                });
                payload.push(t);
            }
        }
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for m in payload {
            for &x in m.data() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let (header, mut tensors) = read_checkpoint(path, &bytes)?;
        let mut next = |name: &str| -> Result<Matrix> {
            tensors.next().ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                reason: format!("missing tensor {name}"),
            })
        };
        let mut layers = Vec::new();
        for (i, lh) in header.layers.iter().enumerate() {
            let weights = next("weights")?;
            let norm_scale = next("norm_scale")?;
            let norm_shift = next("norm_shift")?;
            let running_mean = next("running_mean")?;
            let running_var = next("running_var")?;
            let decay_raw = next("decay_raw")?;
            let recurrent = if lh.recurrent {
                Some(RecurrentWeights::new(next("recurrent")?)?)
            } else {
                None
            };
            let mut layer =
                SpikingLayer::from_parts(weights, header.timesteps, lh.neuron, recurrent);
            layer.norm_scale = norm_scale;
            layer.norm_shift = norm_shift;
            layer.running_mean = running_mean;
            layer.running_var = running_var;
            layer.decay_raw = decay_raw;
            layer.stats_populated = lh.stats_populated;
            layer.set_index(i);
            layers.push(layer);
        }
        FFNetwork::from_layers(layers, header.num_classes, header.input_dim)
    }
}

#[derive(Serialize, Deserialize, Debug)]
pub(crate) struct CheckpointHeader {
    pub num_classes: usize,
    pub input_dim: usize,
    pub timesteps: usize,
    pub layers: Vec<LayerHeader>,
    pub tensors: Vec<TensorHeader>,
}

#[derive(Serialize, Deserialize, Debug)]
pub(crate) struct LayerHeader {
    pub inputs: usize,
    pub outputs: usize,
    pub neuron: NeuronConfig,
    pub recurrent: bool,
    pub stats_populated: bool,
}

#[derive(Serialize, Deserialize, Debug)]
pub(crate) struct TensorHeader {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

fn read_checkpoint<'a>(
    path: &Path,
    bytes: &'a [u8],
) -> Result<(CheckpointHeader, impl Iterator<Item = Matrix> + 'a)> {
    let fmt = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 12 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            needed: (12 - bytes.len()) as u64,
        });
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(fmt("not a checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = bytes
        .get(12..12 + hlen)
        .ok_or_else(|| fmt(format!("header of {hlen} bytes runs past end of file")))?;
    let header: CheckpointHeader =
        serde_json::from_slice(body).map_err(|e| fmt(format!("header: {e}")))?;
    let needed: usize = header.tensors.iter().map(|t| t.rows * t.cols * 8).sum();
    let data = &bytes[12 + hlen..];
    if data.len() != needed {
        return Err(Error::Consistency {
            path: path.to_path_buf(),
            reason: format!(
                "tensor table declares {needed} data bytes, file has {}",
                data.len()
            ),
        });
    }
    let shapes: Vec<(usize, usize)> = header.tensors.iter().map(|t| (t.rows, t.cols)).collect();
    let mut offset = 0;
    let iter = shapes.into_iter().map(move |(r, c)| {
        let n = r * c;
        let vals = data[offset..offset + 8 * n]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        offset += 8 * n;
        Matrix::from_vec(r, c, vals).unwrap()
    });
    Ok((header, iter))
}

/// Summary of a checkpoint for `inspect`.
pub fn describe_checkpoint(path: impl AsRef<Path>) -> Result<String> {
    use std::fmt::Write;
    let net = FFNetwork::load(&path)?;
    let mut s = String::new();
    let arch: Vec<String> = std::iter::once(net.input_dim)
        .chain(net.hidden_sizes())
        .map(|n| n.to_string())
        .collect();
    writeln!(s, "checkpoint: {}", path.as_ref().display()).unwrap();
    writeln!(s, "format version: {CHECKPOINT_VERSION}").unwrap();
    writeln!(s, "architecture: {}", arch.join("-")).unwrap();
    writeln!(
        s,
        "classes: {}  timesteps: {}",
        net.num_classes, net.timesteps
    )
    .unwrap();
    for (i, l) in net.layers.iter().enumerate() {
        let n = &l.neuron;
        writeln!(
            s,
            "layer {i}: {} -> {}  threshold={} decay={}{} reset={} surrogate_slope={}{}",
            l.inputs(),
            l.outputs(),
            n.threshold,
            n.decay,
            if n.learnable_decay {
                " (learnable)"
            } else {
                ""
            },
            n.reset.as_str(),
            n.surrogate_slope,
            if l.recurrent.is_some() {
                " recurrent"
            } else {
                ""
            },
        )
        .unwrap();
        for (name, count) in l.parameter_counts() {
            writeln!(s, "  {name:<12} {count}").unwrap();
        }
        if l.stats_populated {
            for t in 0..l.timesteps() {
                let m = l.running_mean.row(t);
                let v = l.running_var.row(t);
                let mean_m = m.iter().sum::<f64>() / m.len() as f64;
                let mean_v = v.iter().sum::<f64>() / v.len() as f64;
                writeln!(
                    s,
                    "  stats t={t:<3} mean(mu)={mean_m:.6} mean(var)={mean_v:.6}"
                )
                .unwrap();
            }
        } else {
            writeln!(s, "  running stats: unpopulated").unwrap();
        }
    }
    writeln!(s, "total trainable parameters: {}", net.parameter_count()).unwrap();
    Ok(s)
}
