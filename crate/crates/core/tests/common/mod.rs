//! Scalar reference implementation of one spiking layer, written with plain loops and
//! no library code beyond parameter containers, used as an oracle by the tests.
#![allow(dead_code)]

use snnff::neuron::{NeuronConfig, RecurrentWeights, ResetMode};
use snnff::numerics::{Matrix, RngStream};
use snnff::{LayerInput, SpikingLayer};

pub const EPS: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct Params {
    /// `w[i][k]`: input k to neuron i.
    pub w: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub shift: Vec<Vec<f64>>,
    /// Per-neuron decay parameter: raw logit if learnable, else the decay itself.
    pub decay: Vec<f64>,
    pub learnable: bool,
    pub v: Option<Vec<Vec<f64>>>,
    pub threshold: f64,
    pub slope: f64,
    pub zero_reset: bool,
}

#[derive(Clone, Copy, PartialEq)]
pub enum Spike {
    Step,
    Smooth,
}

pub struct Trace {
    /// `[t][b][i]`
    pub u: Vec<Vec<Vec<f64>>>,
    pub s: Vec<Vec<Vec<f64>>>,
    /// Normalized drive before recurrent feedback.
    pub normed: Vec<Vec<Vec<f64>>>,
    pub counts: Vec<Vec<f64>>,
    pub g: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn spike(u: f64, p: &Params, kind: Spike) -> f64 {
    match kind {
        Spike::Step => {
            if u >= p.threshold {
                1.0
            } else {
                0.0
            }
        }
        Spike::Smooth => {
            let k = std::f64::consts::PI * p.slope / 2.0;
            0.5 + (k * (u - p.threshold)).atan() / (std::f64::consts::PI * k)
        }
    }
}

/// Train-mode forward with batch statistics. `x[t][b][k]`. When `reset_spikes` is given,
/// the reset term uses those spikes instead of the live ones (a detached reset).
pub fn forward(
    p: &Params,
    x: &[Vec<Vec<f64>>],
    kind: Spike,
    reset_spikes: Option<&[Vec<Vec<f64>>]>,
) -> Trace {
    let steps = x.len();
    let b = x[0].len();
    let n = p.w.len();
    let d = p.w[0].len();
    let beta: Vec<f64> = p
        .decay
        .iter()
        .map(|&r| if p.learnable { sigmoid(r) } else { r })
        .collect();
    let mut u = vec![vec![0.0; n]; b];
    let mut s = vec![vec![0.0; n]; b];
    let mut tr = Trace {
        u: vec![],
        s: vec![],
        normed: vec![],
        counts: vec![vec![0.0; n]; b],
        g: vec![0.0; b],
    };
    for t in 0..steps {
        let mut a = vec![vec![0.0; n]; b];
        for r in 0..b {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += p.w[i][k] * x[t][r][k];
                }
                a[r][i] = acc;
            }
        }
        let mut nd = vec![vec![0.0; n]; b];
        for i in 0..n {
            let mean = (0..b).map(|r| a[r][i]).sum::<f64>() / b as f64;
            let var = (0..b).map(|r| (a[r][i] - mean).powi(2)).sum::<f64>() / b as f64;
            for r in 0..b {
                nd[r][i] = p.gamma[t][i] * (a[r][i] - mean) / (var + EPS).sqrt() + p.shift[t][i];
            }
        }
        tr.normed.push(nd.clone());
        if let Some(v) = &p.v {
            for r in 0..b {
                for j in 0..n {
                    let mut fb = 0.0;
                    for i in 0..n {
                        fb += s[r][i] * v[i][j];
                    }
                    nd[r][j] += fb;
                }
            }
        }
        let mut new_u = vec![vec![0.0; n]; b];
        let mut new_s = vec![vec![0.0; n]; b];
        for r in 0..b {
            for i in 0..n {
                let rs = match reset_spikes {
                    Some(fixed) if t > 0 => fixed[t - 1][r][i],
                    Some(_) => 0.0,
                    None => s[r][i],
                };
                let reset = if p.zero_reset {
                    beta[i] * u[r][i] * rs
                } else {
                    p.threshold * rs
                };
                new_u[r][i] = beta[i] * u[r][i] + nd[r][i] - reset;
                new_s[r][i] = spike(new_u[r][i], p, kind);
                tr.counts[r][i] += new_s[r][i];
            }
        }
        u = new_u;
        s = new_s;
        tr.u.push(u.clone());
        tr.s.push(s.clone());
    }
    for r in 0..b {
        tr.g[r] = tr.counts[r].iter().map(|c| c * c).sum::<f64>() / n as f64;
    }
    tr
}

pub struct Instance {
    pub params: Params,
    /// `x[t][b][k]`
    pub x: Vec<Vec<Vec<f64>>>,
    pub constant_input: bool,
    pub weights_b: Vec<f64>,
}

/// Random tiny instance. Variant flags come from the seed so 20 seeds cover
/// static/temporal input, both resets, learnable decay and recurrence.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = RngStream::new(seed);
    let n = 2 + rng.below(4);
    let steps = 2 + rng.below(4);
    let b = 3 + rng.below(6);
    let d = 2 + rng.below(5);
    let constant_input = seed % 2 == 0;
    let zero_reset = seed % 3 == 1;
    let learnable = seed % 4 < 2;
    let recurrent = seed % 5 >= 3;
    let mut m = |r: usize, c: usize, lo: f64, hi: f64| -> Vec<Vec<f64>> {
        (0..r)
            .map(|_| (0..c).map(|_| rng.uniform(lo, hi)).collect())
            .collect()
    };
    let w = m(n, d, -1.0, 1.0);
    let gamma = m(steps, n, 0.5, 1.5);
    let shift = m(steps, n, 0.0, 1.0);
    let v = recurrent.then(|| m(n, n, -0.5, 0.5));
    let decay = if learnable {
        m(1, n, 0.5, 3.0).remove(0)
    } else {
        vec![0.9; n]
    };
    let x = if constant_input {
        let x0 = m(b, d, 0.0, 1.0);
        vec![x0; steps]
    } else {
        (0..steps).map(|_| m(b, d, 0.0, 1.0)).collect()
    };
    let weights_b = m(1, b, -1.0, 1.0).remove(0);
    Instance {
        params: Params {
            w,
            gamma,
            shift,
            decay,
            learnable,
            v,
            threshold: 1.0,
            slope: 2.0,
            zero_reset,
        },
        x,
        constant_input,
        weights_b,
    }
}

fn to_matrix(v: &[Vec<f64>]) -> Matrix {
    Matrix::from_vec(v.len(), v[0].len(), v.concat()).unwrap()
}

/// The same instance as a library layer plus its input.
pub fn to_layer(inst: &Instance) -> (SpikingLayer, LayerInput) {
    let p = &inst.params;
    let neuron = NeuronConfig {
        threshold: p.threshold,
        decay: if p.learnable { 0.9 } else { p.decay[0] },
        learnable_decay: p.learnable,
        reset: if p.zero_reset {
            ResetMode::Zero
        } else {
            ResetMode::Subtract
        },
        surrogate_slope: p.slope,
    };
    let mut layer = SpikingLayer::from_parts(
        to_matrix(&p.w),
        inst.x.len(),
        neuron,
        p.v.as_ref().map(|v| RecurrentWeights {
            weights: to_matrix(v),
        }),
    );
    layer.norm_scale = to_matrix(&p.gamma);
    layer.norm_shift = to_matrix(&p.shift);
    if p.learnable {
        layer.decay_raw = Matrix::row_vector(&p.decay);
    }
    let input = if inst.constant_input {
        LayerInput::Constant(to_matrix(&inst.x[0]))
    } else {
        LayerInput::Steps(inst.x.iter().map(|xt| to_matrix(xt)).collect())
    };
    (layer, input)
}

/// Central-difference gradients of `Σ_b w_b G_b` with the reset spikes held at their
/// unperturbed values. Order: w, gamma, shift, decay (if learnable), v (if present).
pub fn finite_difference(inst: &Instance, h: f64) -> Vec<f64> {
    let base = forward(&inst.params, &inst.x, Spike::Smooth, None);
    let fixed = base.s.clone();
    let loss = |p: &Params| -> f64 {
        let tr = forward(p, &inst.x, Spike::Smooth, Some(&fixed));
        tr.g.iter().zip(&inst.weights_b).map(|(g, w)| g * w).sum()
    };
    let mut grads = Vec::new();
    let mut probe = |get: &dyn Fn(&mut Params) -> &mut f64| {
        let mut p = inst.params.clone();
        let orig = *get(&mut p);
        *get(&mut p) = orig + h;
        let up = loss(&p);
        *get(&mut p) = orig - h;
        let down = loss(&p);
        grads.push((up - down) / (2.0 * h));
    };
    let p0 = &inst.params;
    for i in 0..p0.w.len() {
        for k in 0..p0.w[0].len() {
            probe(&|p| &mut p.w[i][k]);
        }
    }
    for t in 0..p0.gamma.len() {
        for i in 0..p0.gamma[0].len() {
            probe(&|p| &mut p.gamma[t][i]);
        }
    }
    for t in 0..p0.shift.len() {
        for i in 0..p0.shift[0].len() {
            probe(&|p| &mut p.shift[t][i]);
        }
    }
    if p0.learnable {
        for i in 0..p0.decay.len() {
            probe(&|p| &mut p.decay[i]);
        }
    }
    if let Some(v) = &p0.v {
        for i in 0..v.len() {
            for j in 0..v.len() {
                probe(&|p| &mut p.v.as_mut().unwrap()[i][j]);
            }
        }
    }
    grads
}

pub fn relative_error(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1e-7)
}

/// Value at quantile `q` of `v` (nearest rank).
pub fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}
