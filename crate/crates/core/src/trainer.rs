//! Forward-Forward training loop.
//!
//! Each mini-batch:
//! 1. scores every label overlay with the current network and samples one hard
//!    negative label per sample,
//! 2. builds the positive and negative variants,
//! 3. runs one train-mode forward through all layers,
//! 4. updates every layer from its own goodness contrast, with no gradient crossing
//!    layer boundaries.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataio::{embed_label, make_negative, make_positive, Dataset, SampleBatch};
use crate::error::{Error, Result};
use crate::layer::{goodness, LayerGradients, LayerInput};
use crate::network::FFNetwork;
use crate::numerics::{Matrix, RngStream};
use crate::predictor;

/// How positive and negative samples share normalization statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormBatching {
    /// One forward over the stacked positive and negative batch.
    Joint,
    /// Separate forwards, each normalized with its own batch statistics.
    Separate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Milestones as fractions of `epochs`; the rate is multiplied by `lr_factor` at each.
    pub lr_milestones: Vec<f64>,
    pub lr_factor: f64,
    /// Sharpness of the contrastive loss.
    pub alpha_loss: f64,
    pub seed: u64,
    /// Evaluate test accuracy every this many epochs (and always after the last); 0 = only last.
    pub eval_every: usize,
    pub norm_batching: NormBatching,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 4096,
            lr: 0.001,
            lr_milestones: vec![0.5, 0.75],
            lr_factor: 0.3,
            alpha_loss: 0.6,
            seed: 0,
            eval_every: 0,
            norm_batching: NormBatching::Joint,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.batch_size < 2 {
            bad.push(format!("batch_size must be >= 2, got {}", self.batch_size));
        }
        if !(self.alpha_loss > 0.0 && self.alpha_loss.is_finite()) {
            bad.push(format!("alpha_loss must be > 0, got {}", self.alpha_loss));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            bad.push(format!("lr must be >= 0, got {}", self.lr));
        }
        if !(self.lr_factor > 0.0 && self.lr_factor.is_finite()) {
            bad.push(format!("lr_factor must be > 0, got {}", self.lr_factor));
        }
        if self.lr_milestones.iter().any(|m| !(0.0..=1.0).contains(m)) {
            bad.push(format!(
                "lr_milestones are fractions of the run and must lie in [0, 1], got {:?}",
                self.lr_milestones
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

/// Learning rate for 0-based `epoch`: `lr * factor^k` where `k` counts milestones reached.
pub fn lr_schedule(epoch: usize, config: &TrainConfig) -> f64 {
    let passed = config
        .lr_milestones
        .iter()
        .filter(|&&f| epoch >= (f * config.epochs as f64).floor() as usize)
        .count();
    config.lr * config.lr_factor.powi(passed as i32)
}

/// Batch-mean contrastive loss and its gradients with respect to both goodness vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FfLoss {
    pub loss: f64,
    pub d_pos: Vec<f64>,
    pub d_neg: Vec<f64>,
}

/// `σ(-z) = 1 / (1 + e^z)` without overflow.
#[inline]
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Per-sample loss `-αΔ / (1 + e^{αΔ})`.
#[inline]
pub fn ff_loss_single(delta: f64, alpha: f64) -> f64 {
    let z = alpha * delta;
    -z * sigmoid_neg(z)
}

/// `d/dΔ` of [`ff_loss_single`].
#[inline]
pub fn ff_loss_slope(delta: f64, alpha: f64) -> f64 {
    let z = alpha * delta;
    let s = sigmoid_neg(z);
    alpha * (-s + z * s * (1.0 - s))
}

pub fn ff_loss(g_pos: &[f64], g_neg: &[f64], alpha: f64) -> Result<FfLoss> {
    if g_pos.len() != g_neg.len() || g_pos.is_empty() {
        return Err(Error::Argument(format!(
            "goodness vectors must be nonempty and equal length, got {} and {}",
            g_pos.len(),
            g_neg.len()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::Argument(format!("alpha must be > 0, got {alpha}")));
    }
    let b = g_pos.len() as f64;
    let mut loss = 0.0;
    let mut d_pos = Vec::with_capacity(g_pos.len());
    let mut d_neg = Vec::with_capacity(g_pos.len());
    for (&p, &n) in g_pos.iter().zip(g_neg) {
        let delta = p - n;
        loss += ff_loss_single(delta, alpha);
        let g = ff_loss_slope(delta, alpha) / b;
        d_pos.push(g);
        d_neg.push(-g);
    }
    Ok(FfLoss {
        loss: loss / b,
        d_pos,
        d_neg,
    })
}

/// Goodness summed over layers for every (sample, label) pair: `out[sample][label]`.
pub fn label_goodness(net: &FFNetwork, batch: &SampleBatch) -> Result<Vec<Vec<f64>>> {
    let c = net.num_classes;
    let b = batch.len();
    let mut stacked: Option<Matrix> = None;
    for y in 0..c {
        let v = embed_label(batch, &vec![y; b], c)?;
        stacked = Some(match stacked {
            None => v.inputs,
            Some(s) => s.vstack(&v.inputs)?,
        });
    }
    let probe = crate::dataio::LabeledVariant {
        inputs: stacked.unwrap_or_else(|| Matrix::zeros(0, batch.inputs.cols())),
        overlay_labels: Vec::new(),
        polarity: crate::dataio::Polarity::Probe,
        input_dim: batch.input_dim,
        timesteps: batch.timesteps,
    };
    let per_layer = net.eval_goodness(&probe.layer_input())?;
    let mut out = vec![vec![0.0; c]; b];
    for layer in &per_layer {
        for y in 0..c {
            for (s, row) in out.iter_mut().enumerate() {
                row[y] += layer[y * b + s];
            }
        }
    }
    Ok(out)
}

/// Sampling distribution over labels: true label zeroed, square root, normalized.
/// Falls back to uniform over the wrong labels when they all score zero.
pub fn hard_label_distribution(scores: &[f64], true_label: usize) -> Vec<f64> {
    let mut w: Vec<f64> = scores
        .iter()
        .enumerate()
        .map(|(y, &s)| {
            if y == true_label {
                0.0
            } else {
                s.max(0.0).sqrt()
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        w.iter_mut().for_each(|x| *x /= total);
    } else {
        let k = (scores.len() - 1) as f64;
        for (y, x) in w.iter_mut().enumerate() {
            *x = if y == true_label { 0.0 } else { 1.0 / k };
        }
    }
    w
}

/// Draws one negative label per sample from the network's own label scores.
pub fn sample_hard_labels(
    net: &FFNetwork,
    batch: &SampleBatch,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let scores = label_goodness(net, batch)?;
    Ok(draw_from_scores(&scores, &batch.labels, rng))
}

fn draw_from_scores(scores: &[Vec<f64>], labels: &[usize], rng: &mut RngStream) -> Vec<usize> {
    scores
        .iter()
        .zip(labels)
        .map(|(s, &t)| rng.categorical(&hard_label_distribution(s, t)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub layer_loss: Vec<f64>,
    pub total_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub seconds: f64,
    pub mean_pos_goodness: Vec<f64>,
    pub mean_neg_goodness: Vec<f64>,
    pub lr: f64,
}

/// One training step on a single batch. Returns per-layer (loss, mean g_pos, mean g_neg)
/// and the number of samples whose pre-update label scores already picked the true label.
pub fn train_batch(
    net: &mut FFNetwork,
    batch: &SampleBatch,
    config: &TrainConfig,
    lr: f64,
    rng: &mut RngStream,
) -> Result<(Vec<(f64, f64, f64)>, usize)> {
    let c = net.num_classes;
    let b = batch.len();
    let scores = label_goodness(net, batch)?;
    let correct = scores
        .iter()
        .zip(&batch.labels)
        .filter(|(s, &t)| predictor::argmax(s) == t)
        .count();
    let negatives = draw_from_scores(&scores, &batch.labels, rng);
    let pos = make_positive(batch, c)?;
    let neg = make_negative(batch, &negatives, c)?;

    let (pos_in, neg_in) = (pos.layer_input(), neg.layer_input());
    let mut stats = Vec::with_capacity(net.layers.len());

    let separate = config.norm_batching == NormBatching::Separate && b >= 2;
    if separate {
        let pos_traces = net.forward_train(&pos_in)?;
        let neg_traces = net.forward_train(&neg_in)?;
        for (k, (tp, tn)) in pos_traces.iter().zip(&neg_traces).enumerate() {
            let gp = goodness(tp).per_sample;
            let gn = goodness(tn).per_sample;
            let l = ff_loss(&gp, &gn, config.alpha_loss)?;
            let layer = &net.layers[k];
            let mut grads = layer.backward(tp, &l.d_pos)?;
            grads.add_assign(&layer.backward(tn, &l.d_neg)?)?;
            stats.push(finish_layer(net, k, &grads, &l, &gp, &gn, lr)?);
        }
    } else {
        let joint = stack_inputs(&pos_in, &neg_in)?;
        let traces = net.forward_train(&joint)?;
        for (k, tr) in traces.iter().enumerate() {
            let g = goodness(tr).per_sample;
            let (gp, gn) = g.split_at(b);
            let l = ff_loss(gp, gn, config.alpha_loss)?;
            let mut seed = l.d_pos.clone();
            seed.extend_from_slice(&l.d_neg);
            let grads = net.layers[k].backward(tr, &seed)?;
            stats.push(finish_layer(net, k, &grads, &l, gp, gn, lr)?);
        }
    }
    Ok((stats, correct))
}

fn finish_layer(
    net: &mut FFNetwork,
    k: usize,
    grads: &LayerGradients,
    loss: &crate::trainer::FfLoss,
    gp: &[f64],
    gn: &[f64],
    lr: f64,
) -> Result<(f64, f64, f64)> {
    net.layers[k].apply_gradients(grads, lr)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok((loss.loss, mean(gp), mean(gn)))
}

fn stack_inputs(a: &LayerInput, b: &LayerInput) -> Result<LayerInput> {
    Ok(match (a, b) {
        (LayerInput::Constant(x), LayerInput::Constant(y)) => LayerInput::Constant(x.vstack(y)?),
        (LayerInput::Steps(x), LayerInput::Steps(y)) => LayerInput::Steps(
            x.iter()
                .zip(y)
                .map(|(p, q)| p.vstack(q))
                .collect::<Result<_>>()?,
        ),
        _ => {
            return Err(Error::Argument(
                "cannot stack static and temporal inputs".into(),
            ))
        }
    })
}

/// Runs one epoch over `train` (0-based `epoch` index drives the LR schedule).
pub fn train_epoch(
    net: &mut FFNetwork,
    train: &Dataset,
    config: &TrainConfig,
    epoch: usize,
    rng: &mut RngStream,
) -> Result<EpochMetrics> {
    let started = Instant::now();
    if train.is_empty() {
        return Err(Error::Usage("cannot train on an empty dataset".into()));
    }
    if train.input_dim != net.input_dim || train.num_classes != net.num_classes {
        return Err(Error::Argument(format!(
            "dataset has d={}, c={} but network expects d={}, c={}",
            train.input_dim, train.num_classes, net.input_dim, net.num_classes
        )));
    }
    if train.temporal && train.timesteps != net.timesteps {
        return Err(Error::Argument(format!(
            "temporal dataset has {} timesteps, network runs {}",
            train.timesteps, net.timesteps
        )));
    }
    let lr = lr_schedule(epoch, config);
    let n_layers = net.layers.len();
    let mut loss = vec![0.0; n_layers];
    let mut gpos = vec![0.0; n_layers];
    let mut gneg = vec![0.0; n_layers];
    let mut correct = 0usize;
    let mut seen = 0usize;
    for (bi, idx) in train
        .epoch_batches(config.batch_size, rng)
        .iter()
        .enumerate()
    {
        let batch = train.batch(idx);
        let (stats, ok) = train_batch(net, &batch, config, lr, rng)?;
        let w = batch.len() as f64;
        for (k, (l, p, n)) in stats.into_iter().enumerate() {
            if !l.is_finite() || l.abs() > 1e6 {
                return Err(Error::Diverged {
                    layer: k,
                    batch: bi,
                    loss: l.abs(),
                });
            }
            loss[k] += l * w;
            gpos[k] += p * w;
            gneg[k] += n * w;
        }
        correct += ok;
        seen += batch.len();
    }
    let n = seen as f64;
    let layer_loss: Vec<f64> = loss.iter().map(|l| l / n).collect();
    Ok(EpochMetrics {
        epoch: epoch + 1,
        total_loss: layer_loss.iter().sum(),
        layer_loss,
        train_accuracy: correct as f64 / n,
        test_accuracy: None,
        seconds: started.elapsed().as_secs_f64(),
        mean_pos_goodness: gpos.iter().map(|g| g / n).collect(),
        mean_neg_goodness: gneg.iter().map(|g| g / n).collect(),
        lr,
    })
}

/// Trains for `config.epochs` epochs, evaluating on `test` per `eval_every`.
/// `on_epoch` sees every epoch's metrics as soon as they are final.
pub fn train(
    net: &mut FFNetwork,
    train_set: &Dataset,
    test_set: Option<&Dataset>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<Vec<EpochMetrics>> {
    config.validate()?;
    let mut rng = RngStream::new(config.seed).fork(1);
    let mut history = Vec::with_capacity(config.epochs);
    for e in 0..config.epochs {
        let mut m = train_epoch(net, train_set, config, e, &mut rng)?;
        let last = e + 1 == config.epochs;
        let due = config.eval_every > 0 && (e + 1) % config.eval_every == 0;
        if let Some(test) = test_set {
            if last || due {
                let t0 = Instant::now();
                m.test_accuracy = Some(predictor::evaluate(net, test)?);
                m.seconds += t0.elapsed().as_secs_f64();
            }
        }
        log::info!(
            "epoch {:>3}  loss {:.5}  train_acc {:.4}  test_acc {}  {:.1}s",
            m.epoch,
            m.total_loss,
            m.train_accuracy,
            m.test_accuracy
                .map_or("-".to_string(), |a| format!("{a:.4}")),
            m.seconds
        );
        on_epoch(&m);
        history.push(m);
    }
    Ok(history)
}
