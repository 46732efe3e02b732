//! One spiking layer: train-mode forward, spike counts and goodness, then eval mode.
//!
//!     cargo run --example layer_goodness

use snnff::layer::goodness;
use snnff::{LayerInput, Matrix, Mode, NeuronConfig, RngStream, SpikingLayer};

fn main() -> snnff::Result<()> {
    let mut rng = RngStream::new(3);
    let (batch, inputs, neurons, steps) = (6, 8, 5, 10);
    let mut layer = SpikingLayer::new(
        inputs,
        neurons,
        steps,
        NeuronConfig::default(),
        false,
        &mut rng,
    );
    let x = Matrix::from_vec(
        batch,
        inputs,
        (0..batch * inputs).map(|_| rng.next_f64()).collect(),
    )?;
    let input = LayerInput::Constant(x);

    let train = layer.forward(&input, Mode::Train)?;
    println!("spike counts over {steps} steps:");
    for r in train.counts.iter_rows() {
        println!("  {r:?}");
    }
    println!("goodness per sample: {:.3?}", goodness(&train).per_sample);

    // eval mode normalizes with the running statistics gathered above
    let eval = layer.forward_eval(&input)?;
    println!("eval goodness:       {:.3?}", goodness(&eval).per_sample);
    Ok(())
}
