//! Compares analytic layer gradients with central differences.
//!
//! The check uses the smooth spike function and a single timestep, so no reset
//! term enters and plain finite differences are exact up to truncation error.
//!
//!     cargo run --example gradient_check

use snnff::layer::goodness;
use snnff::neuron::SpikeFn;
use snnff::{LayerInput, Matrix, Mode, NeuronConfig, RngStream, SpikingLayer};

fn objective(layer: &mut SpikingLayer, input: &LayerInput, b: &[f64]) -> f64 {
    let tr = layer
        .forward_with(input, Mode::Train, SpikeFn::Smooth)
        .unwrap();
    goodness(&tr)
        .per_sample
        .iter()
        .zip(b)
        .map(|(g, w)| g * w)
        .sum()
}

fn main() -> snnff::Result<()> {
    let mut rng = RngStream::new(11);
    let (batch, inputs, neurons) = (5, 4, 3);
    let mut layer = SpikingLayer::new(inputs, neurons, 1, NeuronConfig::default(), false, &mut rng);
    let x = Matrix::from_vec(
        batch,
        inputs,
        (0..batch * inputs).map(|_| rng.normal(0.0, 1.0)).collect(),
    )?;
    let input = LayerInput::Constant(x);
    let b: Vec<f64> = (0..batch).map(|_| rng.normal(0.0, 1.0)).collect();

    let trace = layer.forward_with(&input, Mode::Train, SpikeFn::Smooth)?;
    let grads = layer.backward(&trace, &b)?;

    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..neurons {
        for j in 0..inputs {
            let w = layer.weights.get(i, j);
            layer.weights.set(i, j, w + h);
            let up = objective(&mut layer, &input, &b);
            layer.weights.set(i, j, w - h);
            let down = objective(&mut layer, &input, &b);
            layer.weights.set(i, j, w);
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.weights.get(i, j);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max(rel);
            println!("dW[{i}][{j}]  analytic {analytic:+.6e}  numeric {numeric:+.6e}");
        }
    }
    println!("max relative error {worst:.2e}");
    Ok(())
}
