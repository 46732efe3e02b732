//! Leaky integrate-and-fire populations.
//!
//! One step advances every neuron of a `B x N` population:
//!
//! ```text
//! U[t+1] = beta * U[t] + drive[t+1] - R[t]
//! S[t+1] = 1 if U[t+1] >= threshold else 0
//! ```
//!
//! `R[t]` is `threshold * S[t]` for subtractive reset, or `beta * U[t] * S[t]` for
//! reset-to-zero (the leaked potential of a neuron that just fired is discarded).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    Subtract,
    Zero,
}

impl ResetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ResetMode::Subtract => "subtract",
            ResetMode::Zero => "zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronConfig {
    pub threshold: f64,
    pub decay: f64,
    pub learnable_decay: bool,
    pub reset: ResetMode,
    /// Slope of the arctangent surrogate.
    pub surrogate_slope: f64,
}

impl Default for NeuronConfig {
    fn default() -> Self {
        NeuronConfig {
            threshold: 1.0,
            decay: 0.99,
            learnable_decay: false,
            reset: ResetMode::Subtract,
            surrogate_slope: 2.0,
        }
    }
}

impl NeuronConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            bad.push(format!("threshold must be > 0, got {}", self.threshold));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            bad.push(format!("decay must lie in (0, 1), got {}", self.decay));
        }
        if !(self.surrogate_slope > 0.0 && self.surrogate_slope.is_finite()) {
            bad.push(format!(
                "surrogate slope must be > 0, got {}",
                self.surrogate_slope
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

/// How membrane potential turns into output spikes during a forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpikeFn {
    /// Binary threshold crossing; what training and inference use.
    #[default]
    Heaviside,
    /// `1/2 + arctan(k (U - threshold)) / (pi k)` with `k = pi * slope / 2`, whose derivative
    /// is exactly [`surrogate_derivative`]. Only meaningful for gradient checking.
    Smooth,
}

impl SpikeFn {
    #[inline]
    pub fn apply(self, u: f64, config: &NeuronConfig) -> f64 {
        match self {
            SpikeFn::Heaviside => {
                if u >= config.threshold {
                    1.0
                } else {
                    0.0
                }
            }
            SpikeFn::Smooth => {
                let k = PI * config.surrogate_slope / 2.0;
                0.5 + (k * (u - config.threshold)).atan() / (PI * k)
            }
        }
    }
}

/// Membrane and spike state of a `B x N` population.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuronState {
    pub membrane: Matrix,
    pub spikes: Matrix,
    /// Effective per-neuron decay in (0, 1).
    pub decay: Vec<f64>,
    /// Number of steps taken so far.
    pub step: usize,
}

impl NeuronState {
    /// Resting state: zero membrane, no spikes, uniform decay from `config`.
    pub fn new(batch: usize, neurons: usize, config: &NeuronConfig) -> Self {
        Self::with_decay(batch, vec![config.decay; neurons])
    }

    pub fn with_decay(batch: usize, decay: Vec<f64>) -> Self {
        let n = decay.len();
        NeuronState {
            membrane: Matrix::zeros(batch, n),
            spikes: Matrix::zeros(batch, n),
            decay,
            step: 0,
        }
    }

    /// In-place step. `drive` already includes any recurrent contribution.
    pub(crate) fn advance(
        &mut self,
        drive: &Matrix,
        config: &NeuronConfig,
        spike_fn: SpikeFn,
    ) -> Result<()> {
        if drive.shape() != self.membrane.shape() {
            return Err(Error::shape(
                "lif_step",
                self.membrane.shape(),
                drive.shape(),
            ));
        }
        if !drive.is_finite() {
            return Err(Error::Numeric {
                context: format!("neuron drive at timestep {}", self.step),
            });
        }
        let n = self.decay.len();
        let thr = config.threshold;
        let u = self.membrane.data_mut();
        let s = self.spikes.data_mut();
        for ((i, (u, s)), &x) in u.iter_mut().zip(s.iter_mut()).enumerate().zip(drive.data()) {
            let beta = self.decay[i % n];
            let leaked = beta * *u;
            let reset = match config.reset {
                ResetMode::Subtract => thr * *s,
                ResetMode::Zero => leaked * *s,
            };
            *u = leaked + x - reset;
            *s = spike_fn.apply(*u, config);
        }
        self.step += 1;
        Ok(())
    }
}

/// One LIF step of the whole population.
pub fn lif_step(state: &NeuronState, drive: &Matrix, config: &NeuronConfig) -> Result<NeuronState> {
    let mut next = state.clone();
    next.advance(drive, config, SpikeFn::Heaviside)?;
    Ok(next)
}

/// Recurrent weights: `V[i][j]` feeds a spike of neuron `i` into neuron `j` one step later.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentWeights {
    pub weights: Matrix,
}

impl RecurrentWeights {
    pub fn new(weights: Matrix) -> Result<Self> {
        if weights.rows() != weights.cols() {
            return Err(Error::shape(
                "recurrent weights",
                weights.shape(),
                (weights.rows(), weights.rows()),
            ));
        }
        Ok(RecurrentWeights { weights })
    }

    /// `drive + S_prev · V`
    pub fn add_feedback(&self, drive: &Matrix, prev_spikes: &Matrix) -> Result<Matrix> {
        let fb = prev_spikes.matmul(&self.weights)?;
        drive.add(&fb)
    }
}

/// LIF step whose drive is augmented with the previous step's spikes through `rec`.
pub fn recurrent_lif_step(
    state: &NeuronState,
    drive: &Matrix,
    rec: &RecurrentWeights,
    config: &NeuronConfig,
) -> Result<NeuronState> {
    if rec.weights.rows() != state.spikes.cols() {
        return Err(Error::shape(
            "recurrent_lif_step",
            state.spikes.shape(),
            rec.weights.shape(),
        ));
    }
    let total = rec.add_feedback(drive, &state.spikes)?;
    lif_step(state, &total, config)
}

/// Arctangent surrogate derivative of the spike function, centered at threshold:
/// `(1/pi) / (1 + (pi * slope/2 * (U - threshold))^2)`.
#[inline]
pub fn surrogate_derivative(u: f64, config: &NeuronConfig) -> f64 {
    let z = PI * config.surrogate_slope / 2.0 * (u - config.threshold);
    1.0 / (PI * (1.0 + z * z))
}

pub fn surrogate_grad(membrane: &Matrix, config: &NeuronConfig) -> Matrix {
    membrane.map(|u| surrogate_derivative(u, config))
}

/// Logistic map from an unconstrained decay parameter to (0, 1).
#[inline]
pub fn decay_from_raw(raw: f64) -> f64 {
    1.0 / (1.0 + (-raw).exp())
}

#[inline]
pub fn raw_from_decay(decay: f64) -> f64 {
    (decay / (1.0 - decay)).ln()
}
