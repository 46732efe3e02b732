//! One fully connected spiking layer trained with a local objective.
//!
//! Per timestep `t` the layer computes
//!
//! ```text
//! a[t]   = X[t] · Wᵀ
//! x̂[t]   = (a[t] - mu[t]) / sqrt(var[t] + eps)      batch stats (train) or running stats (eval)
//! n[t]   = gamma[t] ⊙ x̂[t] + shift[t]
//! U[t]   = beta ⊙ U[t-1] + n[t] (+ S[t-1] · V) - R[t-1]
//! S[t]   = U[t] >= threshold
//! ```
//!
//! and accumulates spike counts `C = Σ_t S[t]`. Goodness is the mean squared count.
//! `layer_backward` runs reverse-mode through the whole recursion with the arctangent
//! surrogate standing in for the spike derivative; the reset term is treated as a
//! constant.

use crate::error::{Error, Result};
use crate::neuron::{
    decay_from_raw, raw_from_decay, surrogate_derivative, NeuronConfig, NeuronState,
    RecurrentWeights, ResetMode, SpikeFn,
};
use crate::numerics::{AdamState, Matrix, RngStream};

pub const NORM_EPS: f64 = 1e-5;
pub const RUNNING_MOMENTUM: f64 = 0.1;

/// Input presented to a layer over the `T` timesteps.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerInput {
    /// The same `B x N_in` matrix at every timestep (direct-current coding of static data).
    Constant(Matrix),
    /// One `B x N_in` matrix per timestep.
    Steps(Vec<Matrix>),
}

impl LayerInput {
    pub fn batch_size(&self) -> usize {
        match self {
            LayerInput::Constant(m) => m.rows(),
            LayerInput::Steps(s) => s.first().map_or(0, Matrix::rows),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            LayerInput::Constant(m) => m.cols(),
            LayerInput::Steps(s) => s.first().map_or(0, Matrix::cols),
        }
    }

    pub fn at(&self, t: usize) -> &Matrix {
        match self {
            LayerInput::Constant(m) => m,
            LayerInput::Steps(s) => &s[t],
        }
    }

    /// Selects a subset of rows at every timestep.
    pub fn select_rows(&self, idx: &[usize]) -> LayerInput {
        match self {
            LayerInput::Constant(m) => LayerInput::Constant(m.select_rows(idx)),
            LayerInput::Steps(s) => {
                LayerInput::Steps(s.iter().map(|m| m.select_rows(idx)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything recorded during one forward pass of a layer.
#[derive(Clone, Debug)]
pub struct LayerForwardTrace {
    pub mode: Mode,
    pub spike_fn: SpikeFn,
    pub input: LayerInput,
    /// `a[t]`, before normalization.
    pub drives: Vec<Matrix>,
    /// `x̂[t]`, standardized but not yet scaled/shifted.
    pub standardized: Vec<Matrix>,
    /// `n[t] = gamma ⊙ x̂ + shift`.
    pub normalized: Vec<Matrix>,
    pub membranes: Vec<Matrix>,
    pub spikes: Vec<Matrix>,
    pub counts: Matrix,
    /// Per-timestep mean and variance used for normalization.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

impl LayerForwardTrace {
    pub fn timesteps(&self) -> usize {
        self.spikes.len()
    }

    /// Output spike trains, the next layer's input.
    pub fn output(&self) -> LayerInput {
        LayerInput::Steps(self.spikes.clone())
    }
}

/// Per-sample goodness of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodnessReport {
    pub per_sample: Vec<f64>,
}

impl GoodnessReport {
    pub fn mean(&self) -> f64 {
        if self.per_sample.is_empty() {
            0.0
        } else {
            self.per_sample.iter().sum::<f64>() / self.per_sample.len() as f64
        }
    }
}

/// Mean over neurons of the squared spike count, per sample.
pub fn goodness_of_counts(counts: &Matrix) -> GoodnessReport {
    let n = counts.cols() as f64;
    GoodnessReport {
        per_sample: counts
            .iter_rows()
            .map(|r| r.iter().map(|c| c * c).sum::<f64>() / n)
            .collect(),
    }
}

pub fn goodness(trace: &LayerForwardTrace) -> GoodnessReport {
    goodness_of_counts(&trace.counts)
}

/// Gradients of a scalar loss with respect to every trainable tensor of a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradients {
    pub weights: Matrix,
    pub norm_scale: Matrix,
    pub norm_shift: Matrix,
    pub decay_raw: Option<Matrix>,
    pub recurrent: Option<Matrix>,
}

impl LayerGradients {
    pub fn add_assign(&mut self, other: &LayerGradients) -> Result<()> {
        self.weights.add_scaled(&other.weights, 1.0)?;
        self.norm_scale.add_scaled(&other.norm_scale, 1.0)?;
        self.norm_shift.add_scaled(&other.norm_shift, 1.0)?;
        if let (Some(a), Some(b)) = (&mut self.decay_raw, &other.decay_raw) {
            a.add_scaled(b, 1.0)?;
        }
        if let (Some(a), Some(b)) = (&mut self.recurrent, &other.recurrent) {
            a.add_scaled(b, 1.0)?;
        }
        Ok(())
    }

    /// Flattened view in a fixed order: weights, scale, shift, decay, recurrent.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        v.extend_from_slice(self.weights.data());
        v.extend_from_slice(self.norm_scale.data());
        v.extend_from_slice(self.norm_shift.data());
        if let Some(d) = &self.decay_raw {
            v.extend_from_slice(d.data());
        }
        if let Some(r) = &self.recurrent {
            v.extend_from_slice(r.data());
        }
        v
    }
}

/// Adam state for each trainable tensor of a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerOptimizer {
    pub weights: AdamState,
    pub norm_scale: AdamState,
    pub norm_shift: AdamState,
    pub decay_raw: Option<AdamState>,
    pub recurrent: Option<AdamState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpikingLayer {
    /// `N_out x N_in`.
    pub weights: Matrix,
    /// `T x N_out`, one row per timestep.
    pub norm_scale: Matrix,
    pub norm_shift: Matrix,
    pub running_mean: Matrix,
    pub running_var: Matrix,
    /// False until the first train-mode forward has updated the running statistics.
    pub stats_populated: bool,
    /// `1 x N_out` unconstrained decay parameters; decay = sigmoid(raw).
    pub decay_raw: Matrix,
    pub neuron: NeuronConfig,
    pub recurrent: Option<RecurrentWeights>,
    pub optimizer: LayerOptimizer,
}

impl SpikingLayer {
    /// Fresh layer with uniform(±1/sqrt(fan_in)) weights, unit scale and zero shift.
    pub fn new(
        inputs: usize,
        outputs: usize,
        timesteps: usize,
        neuron: NeuronConfig,
        recurrent: bool,
        rng: &mut RngStream,
    ) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let weights = Matrix::from_vec(
            outputs,
            inputs,
            (0..outputs * inputs)
                .map(|_| rng.uniform(-bound, bound))
                .collect(),
        )
        .unwrap();
        let recurrent = recurrent.then(|| {
            let b = 1.0 / (outputs as f64).sqrt();
            RecurrentWeights {
                weights: Matrix::from_vec(
                    outputs,
                    outputs,
                    (0..outputs * outputs).map(|_| rng.uniform(-b, b)).collect(),
                )
                .unwrap(),
            }
        });
        Self::from_parts(weights, timesteps, neuron, recurrent)
    }

    /// Layer around explicit weights with unit scale, zero shift and unpopulated stats.
    pub fn from_parts(
        weights: Matrix,
        timesteps: usize,
        neuron: NeuronConfig,
        recurrent: Option<RecurrentWeights>,
    ) -> Self {
        let n = weights.rows();
        let optimizer = LayerOptimizer {
            weights: AdamState::new(weights.shape(), 1e-3, "weights"),
            norm_scale: AdamState::new((timesteps, n), 1e-3, "norm scale"),
            norm_shift: AdamState::new((timesteps, n), 1e-3, "norm shift"),
            decay_raw: neuron
                .learnable_decay
                .then(|| AdamState::new((1, n), 1e-3, "decay")),
            recurrent: recurrent
                .as_ref()
                .map(|_| AdamState::new((n, n), 1e-3, "recurrent weights")),
        };
        SpikingLayer {
            weights,
            norm_scale: Matrix::filled(timesteps, n, 1.0),
            norm_shift: Matrix::zeros(timesteps, n),
            running_mean: Matrix::zeros(timesteps, n),
            running_var: Matrix::filled(timesteps, n, 1.0),
            stats_populated: false,
            decay_raw: Matrix::filled(1, n, raw_from_decay(neuron.decay)),
            neuron,
            recurrent,
            optimizer,
        }
    }

    /// Prefixes optimizer error labels with the layer index.
    pub fn set_index(&mut self, index: usize) {
        let o = &mut self.optimizer;
        o.weights.label = format!("layer {index} weights");
        o.norm_scale.label = format!("layer {index} norm scale");
        o.norm_shift.label = format!("layer {index} norm shift");
        if let Some(d) = &mut o.decay_raw {
            d.label = format!("layer {index} decay");
        }
        if let Some(r) = &mut o.recurrent {
            r.label = format!("layer {index} recurrent weights");
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn timesteps(&self) -> usize {
        self.norm_scale.rows()
    }

    /// Effective per-neuron decay.
    pub fn decay(&self) -> Vec<f64> {
        if self.neuron.learnable_decay {
            self.decay_raw
                .data()
                .iter()
                .map(|&r| decay_from_raw(r))
                .collect()
        } else {
            vec![self.neuron.decay; self.outputs()]
        }
    }

    /// Trainable parameter count, by tensor name.
    pub fn parameter_counts(&self) -> Vec<(&'static str, usize)> {
        let mut v = vec![
            ("weights", self.weights.data().len()),
            ("norm_scale", self.norm_scale.data().len()),
            ("norm_shift", self.norm_shift.data().len()),
        ];
        if self.neuron.learnable_decay {
            v.push(("decay", self.decay_raw.data().len()));
        }
        if let Some(r) = &self.recurrent {
            v.push(("recurrent", r.weights.data().len()));
        }
        v
    }

    fn check_input(&self, input: &LayerInput, mode: Mode) -> Result<()> {
        if input.width() != self.inputs() {
            return Err(Error::shape(
                "layer_forward",
                (input.batch_size(), input.width()),
                self.weights.shape(),
            ));
        }
        if let LayerInput::Steps(s) = input {
            if s.len() != self.timesteps() {
                return Err(Error::Shape {
                    op: "layer_forward",
                    left: format!("{} input timesteps", s.len()),
                    right: format!("{} layer timesteps", self.timesteps()),
                });
            }
        }
        if mode == Mode::Train && input.batch_size() < 2 {
            return Err(Error::Usage(format!(
                "train-mode forward needs a batch of at least 2 for batch statistics, got {}",
                input.batch_size()
            )));
        }
        Ok(())
    }

    /// Full forward pass. Train mode normalizes with batch statistics and folds them into
    /// the running averages; eval mode uses the running averages and leaves the layer unchanged.
    pub fn forward(&mut self, input: &LayerInput, mode: Mode) -> Result<LayerForwardTrace> {
        self.forward_with(input, mode, SpikeFn::Heaviside)
    }

    /// Forward with an explicit spike function; `SpikeFn::Smooth` is for gradient checks.
    pub fn forward_with(
        &mut self,
        input: &LayerInput,
        mode: Mode,
        spike_fn: SpikeFn,
    ) -> Result<LayerForwardTrace> {
        let trace = self.run(input, mode, spike_fn)?;
        if mode == Mode::Train {
            self.update_running_stats(&trace);
        }
        Ok(trace)
    }

    /// Eval-mode forward that does not need `&mut self`.
    pub fn forward_eval(&self, input: &LayerInput) -> Result<LayerForwardTrace> {
        self.run(input, Mode::Eval, SpikeFn::Heaviside)
    }

    /// Eval-mode forward keeping only what the next layer and goodness need.
    pub fn forward_eval_light(&self, input: &LayerInput) -> Result<(LayerInput, Matrix)> {
        self.check_input(input, Mode::Eval)?;
        let b = input.batch_size();
        let n = self.outputs();
        let mut state = NeuronState::with_decay(b, self.decay());
        let mut counts = Matrix::zeros(b, n);
        let mut spikes = Vec::with_capacity(self.timesteps());
        let mut cached: Option<Matrix> = None;
        for t in 0..self.timesteps() {
            let a = match (input, &cached) {
                (LayerInput::Constant(_), Some(a)) => a.clone(),
                _ => {
                    let a = input.at(t).matmul_nt(&self.weights)?;
                    if matches!(input, LayerInput::Constant(_)) {
                        cached = Some(a.clone());
                    }
                    a
                }
            };
            let mut drive = a;
            let mean = self.running_mean.row(t);
            let var = self.running_var.row(t);
            let inv: Vec<f64> = var.iter().map(|v| 1.0 / (v + NORM_EPS).sqrt()).collect();
            let (g, s) = (self.norm_scale.row(t), self.norm_shift.row(t));
            for r in 0..b {
                for (j, x) in drive.row_mut(r).iter_mut().enumerate() {
                    *x = g[j] * ((*x - mean[j]) * inv[j]) + s[j];
                }
            }
            if let Some(rec) = &self.recurrent {
                drive = rec.add_feedback(&drive, &state.spikes)?;
            }
            state.advance(&drive, &self.neuron, SpikeFn::Heaviside)?;
            counts.add_scaled(&state.spikes, 1.0)?;
            spikes.push(state.spikes.clone());
        }
        Ok((LayerInput::Steps(spikes), counts))
    }

    fn run(&self, input: &LayerInput, mode: Mode, spike_fn: SpikeFn) -> Result<LayerForwardTrace> {
        self.check_input(input, mode)?;
        let steps = self.timesteps();
        let b = input.batch_size();
        let n = self.outputs();
        let mut state = NeuronState::with_decay(b, self.decay());
        let mut trace = LayerForwardTrace {
            mode,
            spike_fn,
            input: input.clone(),
            drives: Vec::with_capacity(steps),
            standardized: Vec::with_capacity(steps),
            normalized: Vec::with_capacity(steps),
            membranes: Vec::with_capacity(steps),
            spikes: Vec::with_capacity(steps),
            counts: Matrix::zeros(b, n),
            means: Vec::with_capacity(steps),
            variances: Vec::with_capacity(steps),
        };
        for t in 0..steps {
            let a = match input {
                LayerInput::Constant(_) if t > 0 => trace.drives[0].clone(),
                _ => input.at(t).matmul_nt(&self.weights)?,
            };
            if !a.is_finite() {
                return Err(Error::Numeric {
                    context: format!("layer drive at timestep {t}"),
                });
            }
            let (mean, var) = match mode {
                Mode::Train => {
                    let m = a.column_means();
                    let v = a.column_variances(&m);
                    (m, v)
                }
                Mode::Eval => (
                    self.running_mean.row(t).to_vec(),
                    self.running_var.row(t).to_vec(),
                ),
            };
            let inv: Vec<f64> = var.iter().map(|v| 1.0 / (v + NORM_EPS).sqrt()).collect();
            let mut xhat = a.clone();
            for r in 0..b {
                for (j, x) in xhat.row_mut(r).iter_mut().enumerate() {
                    *x = (*x - mean[j]) * inv[j];
                }
            }
            let (g, s) = (self.norm_scale.row(t), self.norm_shift.row(t));
            let mut normed = xhat.clone();
            for r in 0..b {
                for (j, x) in normed.row_mut(r).iter_mut().enumerate() {
                    *x = g[j] * *x + s[j];
                }
            }
            let drive = match &self.recurrent {
                Some(rec) => rec.add_feedback(&normed, &state.spikes)?,
                None => normed.clone(),
            };
            state.advance(&drive, &self.neuron, spike_fn)?;
            trace.counts.add_scaled(&state.spikes, 1.0)?;
            trace.drives.push(a);
            trace.standardized.push(xhat);
            trace.normalized.push(normed);
            trace.membranes.push(state.membrane.clone());
            trace.spikes.push(state.spikes.clone());
            trace.means.push(mean);
            trace.variances.push(var);
        }
        Ok(trace)
    }

    fn update_running_stats(&mut self, trace: &LayerForwardTrace) {
        let b = trace.counts.rows() as f64;
        let unbias = b / (b - 1.0);
        for t in 0..trace.timesteps() {
            let rm = self.running_mean.row_mut(t);
            for (r, &m) in rm.iter_mut().zip(&trace.means[t]) {
                *r = (1.0 - RUNNING_MOMENTUM) * *r + RUNNING_MOMENTUM * m;
            }
            let rv = self.running_var.row_mut(t);
            for (r, &v) in rv.iter_mut().zip(&trace.variances[t]) {
                *r = (1.0 - RUNNING_MOMENTUM) * *r + RUNNING_MOMENTUM * v * unbias;
            }
        }
        self.stats_populated = true;
    }

    /// Reverse-mode gradients of `Σ_b dloss_dg[b] * G[b]` through a train-mode trace.
    pub fn backward(&self, trace: &LayerForwardTrace, dloss_dg: &[f64]) -> Result<LayerGradients> {
        if trace.mode != Mode::Train {
            return Err(Error::Usage(
                "layer_backward needs a train-mode trace (batch statistics)".into(),
            ));
        }
        let b = trace.counts.rows();
        let n = self.outputs();
        let steps = trace.timesteps();
        if dloss_dg.len() != b {
            return Err(Error::Argument(format!(
                "{} goodness gradients for a batch of {b}",
                dloss_dg.len()
            )));
        }
        if steps != self.timesteps() {
            return Err(Error::Usage("trace was not produced by this layer".into()));
        }
        let decay = self.decay();
        let thr_cfg = &self.neuron;

        // dL/dC[b][i] = dL/dG[b] * 2 C[b][i] / N
        let mut d_counts = trace.counts.clone();
        for (r, &dg) in dloss_dg.iter().enumerate() {
            for c in d_counts.row_mut(r) {
                *c *= 2.0 * dg / n as f64;
            }
        }

        let mut g_scale = Matrix::zeros(steps, n);
        let mut g_shift = Matrix::zeros(steps, n);
        let mut g_decay = vec![0.0; n];
        let mut g_rec = self.recurrent.as_ref().map(|_| Matrix::zeros(n, n));
        let mut g_weights = Matrix::zeros(n, self.inputs());
        let mut d_drive_sum = Matrix::zeros(b, n);

        let mut carry_u = Matrix::zeros(b, n);
        let mut carry_s = Matrix::zeros(b, n);
        let zero = Matrix::zeros(b, n);

        for t in (0..steps).rev() {
            let u = &trace.membranes[t];
            let (u_prev, s_prev) = if t > 0 {
                (&trace.membranes[t - 1], &trace.spikes[t - 1])
            } else {
                (&zero, &zero)
            };
            // dU[t]
            let mut du = Matrix::zeros(b, n);
            for idx in 0..b * n {
                let ds = d_counts.data()[idx] + carry_s.data()[idx];
                du.data_mut()[idx] =
                    ds * surrogate_derivative(u.data()[idx], thr_cfg) + carry_u.data()[idx];
            }
            // leak path back to t-1 and the decay gradient
            for r in 0..b {
                for j in 0..n {
                    let idx = r * n + j;
                    let keep = match self.neuron.reset {
                        ResetMode::Subtract => 1.0,
                        ResetMode::Zero => 1.0 - s_prev.data()[idx],
                    };
                    let g = du.data()[idx] * keep;
                    g_decay[j] += g * u_prev.data()[idx];
                    carry_u.data_mut()[idx] = g * decay[j];
                }
            }
            if let (Some(rec), Some(gv)) = (&self.recurrent, &mut g_rec) {
                if t > 0 {
                    gv.add_scaled(&s_prev.matmul_tn(&du)?, 1.0)?;
                }
                carry_s = du.matmul_nt(&rec.weights)?;
            }

            // normalization
            let xhat = &trace.standardized[t];
            let gamma = self.norm_scale.row(t);
            let mut sum_dx = vec![0.0; n];
            let mut sum_dx_x = vec![0.0; n];
            {
                let gs = g_scale.row_mut(t);
                for r in 0..b {
                    let dn = du.row(r);
                    let xr = xhat.row(r);
                    for j in 0..n {
                        gs[j] += dn[j] * xr[j];
                        let dx = dn[j] * gamma[j];
                        sum_dx[j] += dx;
                        sum_dx_x[j] += dx * xr[j];
                    }
                }
            }
            let col_sums = du.column_sums();
            g_shift.row_mut(t).copy_from_slice(&col_sums);

            let inv: Vec<f64> = trace.variances[t]
                .iter()
                .map(|v| 1.0 / (v + NORM_EPS).sqrt())
                .collect();
            let bf = b as f64;
            let mut da = Matrix::zeros(b, n);
            for r in 0..b {
                let dn = du.row(r);
                let xr = xhat.row(r);
                let out = da.row_mut(r);
                for j in 0..n {
                    let dx = dn[j] * gamma[j];
                    out[j] = inv[j] / bf * (bf * dx - sum_dx[j] - xr[j] * sum_dx_x[j]);
                }
            }
            match &trace.input {
                LayerInput::Constant(_) => d_drive_sum.add_scaled(&da, 1.0)?,
                LayerInput::Steps(x) => g_weights.add_scaled(&da.matmul_tn(&x[t])?, 1.0)?,
            }
        }
        if let LayerInput::Constant(x) = &trace.input {
            g_weights = d_drive_sum.matmul_tn(x)?;
        }

        let decay_raw = self.neuron.learnable_decay.then(|| {
            let v: Vec<f64> = g_decay
                .iter()
                .zip(&decay)
                .map(|(g, b)| g * b * (1.0 - b))
                .collect();
            Matrix::row_vector(&v)
        });
        Ok(LayerGradients {
            weights: g_weights,
            norm_scale: g_scale,
            norm_shift: g_shift,
            decay_raw,
            recurrent: g_rec,
        })
    }

    /// One Adam step on every trainable tensor at learning rate `lr`.
    pub fn apply_gradients(&mut self, grads: &LayerGradients, lr: f64) -> Result<()> {
        let o = &mut self.optimizer;
        o.weights.lr = lr;
        o.weights.step(&mut self.weights, &grads.weights)?;
        o.norm_scale.lr = lr;
        o.norm_scale.step(&mut self.norm_scale, &grads.norm_scale)?;
        o.norm_shift.lr = lr;
        o.norm_shift.step(&mut self.norm_shift, &grads.norm_shift)?;
        if let (Some(st), Some(g)) = (&mut o.decay_raw, &grads.decay_raw) {
            st.lr = lr;
            st.step(&mut self.decay_raw, g)?;
        }
        if let (Some(st), Some(g), Some(rec)) =
            (&mut o.recurrent, &grads.recurrent, &mut self.recurrent)
        {
            st.lr = lr;
            st.step(&mut rec.weights, g)?;
        }
        Ok(())
    }
}

/// Free-function form of [`SpikingLayer::forward`].
pub fn layer_forward(
    layer: &mut SpikingLayer,
    input: &LayerInput,
    mode: Mode,
) -> Result<LayerForwardTrace> {
    layer.forward(input, mode)
}

/// Free-function form of [`SpikingLayer::backward`].
pub fn layer_backward(
    layer: &SpikingLayer,
    trace: &LayerForwardTrace,
    dloss_dg: &[f64],
) -> Result<LayerGradients> {
    layer.backward(trace, dloss_dg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NeuronConfig {
        NeuronConfig::default()
    }

    #[test]
    fn goodness_arithmetic() {
        let g = goodness_of_counts(&Matrix::from_rows(&[
            [2.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
            [10.0, 10.0, 10.0],
        ]));
        assert!((g.per_sample[0] - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.per_sample[1], 0.0);
        assert_eq!(g.per_sample[2], 100.0);
    }

    #[test]
    fn identical_rows_normalize_to_shift() {
        let mut layer = SpikingLayer::from_parts(
            Matrix::from_rows(&[[0.5, -0.2], [1.0, 3.0]]),
            2,
            cfg(),
            None,
        );
        layer.norm_shift = Matrix::from_rows(&[[0.6, 0.0], [0.6, 0.0]]);
        let x = Matrix::from_rows(&[[0.3, 0.9], [0.3, 0.9]]);
        let tr = layer
            .forward(&LayerInput::Constant(x), Mode::Train)
            .unwrap();
        for t in 0..2 {
            assert!(tr.standardized[t].data().iter().all(|&v| v == 0.0));
            assert_eq!(tr.normalized[t].row(0), &[0.6, 0.0]);
        }
        assert!((tr.membranes[1].get(0, 0) - (0.99 * 0.6 + 0.6)).abs() < 1e-15);
        assert_eq!(tr.counts.get(0, 0), 1.0);
    }

    #[test]
    fn zero_weights_give_zero_goodness() {
        let mut layer = SpikingLayer::from_parts(Matrix::zeros(3, 4), 5, cfg(), None);
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3, 0.4], [0.9, 0.1, 0.0, 0.5]]);
        let tr = layer
            .forward(&LayerInput::Constant(x), Mode::Train)
            .unwrap();
        assert!(tr.spikes.iter().all(|s| s.sum() == 0.0));
        assert_eq!(goodness(&tr).per_sample, vec![0.0, 0.0]);
    }

    #[test]
    fn usage_errors() {
        let mut layer = SpikingLayer::from_parts(Matrix::zeros(2, 3), 4, cfg(), None);
        let one = LayerInput::Constant(Matrix::zeros(1, 3));
        assert_eq!(
            layer.forward(&one, Mode::Train).unwrap_err().kind(),
            "usage"
        );
        assert!(layer.forward(&one, Mode::Eval).is_ok());
        let steps = LayerInput::Steps(vec![Matrix::zeros(2, 3); 3]);
        assert_eq!(
            layer.forward(&steps, Mode::Train).unwrap_err().kind(),
            "shape"
        );
        let eval = layer
            .forward(&LayerInput::Constant(Matrix::zeros(2, 3)), Mode::Eval)
            .unwrap();
        assert_eq!(
            layer.backward(&eval, &[1.0, 1.0]).unwrap_err().kind(),
            "usage"
        );
    }

    #[test]
    fn running_stats_populate_on_train_only() {
        let mut rng = RngStream::new(1);
        let mut layer = SpikingLayer::new(3, 2, 2, cfg(), false, &mut rng);
        let x = LayerInput::Constant(Matrix::from_rows(&[[1.0, 0.0, 0.5], [0.0, 1.0, 0.2]]));
        layer.forward(&x, Mode::Eval).unwrap();
        assert!(!layer.stats_populated);
        layer.forward(&x, Mode::Train).unwrap();
        assert!(layer.stats_populated);
        assert!(layer.running_var.data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_seed_gives_zero_gradients() {
        let mut rng = RngStream::new(2);
        let mut layer = SpikingLayer::new(
            4,
            3,
            3,
            NeuronConfig {
                learnable_decay: true,
                ..cfg()
            },
            true,
            &mut rng,
        );
        let x = LayerInput::Constant(
            Matrix::from_vec(4, 4, (0..16).map(|i| (i % 5) as f64 / 4.0).collect()).unwrap(),
        );
        let tr = layer.forward(&x, Mode::Train).unwrap();
        let g = layer.backward(&tr, &[0.0; 4]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn light_eval_matches_full_eval() {
        let mut rng = RngStream::new(3);
        let mut layer = SpikingLayer::new(5, 4, 3, cfg(), true, &mut rng);
        let x = LayerInput::Constant(
            Matrix::from_vec(3, 5, (0..15).map(|_| rng.uniform(0.0, 1.0)).collect()).unwrap(),
        );
        layer.forward(&x, Mode::Train).unwrap();
        let full = layer.forward_eval(&x).unwrap();
        let (out, counts) = layer.forward_eval_light(&x).unwrap();
        assert_eq!(counts, full.counts);
        assert_eq!(out, full.output());
    }
}
