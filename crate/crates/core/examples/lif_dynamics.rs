//! A single leaky integrate-and-fire neuron under constant drive, with both reset rules.
//!
//!     cargo run --example lif_dynamics

use snnff::neuron::{lif_step, NeuronConfig, NeuronState, ResetMode};
use snnff::Matrix;

fn main() -> snnff::Result<()> {
    let drive = Matrix::from_rows(&[[0.45]]);
    for reset in [ResetMode::Subtract, ResetMode::Zero] {
        let cfg = NeuronConfig {
            threshold: 1.0,
            decay: 0.9,
            reset,
            ..NeuronConfig::default()
        };
        let mut state = NeuronState::new(1, 1, &cfg);
        println!("reset = {}", reset.as_str());
        for t in 1..=12 {
            state = lif_step(&state, &drive, &cfg)?;
            let s = state.spikes.get(0, 0);
            println!(
                "  t={t:>2}  U={:+.4}  {}",
                state.membrane.get(0, 0),
                if s > 0.0 { "spike" } else { "" }
            );
        }
    }
    Ok(())
}
