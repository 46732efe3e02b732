//! Describes a checkpoint before and after training populates the normalization statistics.
//!
//!     cargo run --example inspect_checkpoint

use snnff::dataio::synthetic;
use snnff::network::describe_checkpoint;
use snnff::{FFNetwork, NeuronConfig, RngStream, TrainConfig};

fn main() -> snnff::Result<()> {
    let (train, _) = synthetic::generate("blobs", 1)?;
    let mut net = FFNetwork::new(
        train.input_dim,
        &[16, 8],
        2,
        5,
        NeuronConfig::default(),
        false,
        &mut RngStream::new(1),
    )?;
    let path = std::env::temp_dir().join("snnff-inspect.sffc");

    net.save(&path)?;
    println!("fresh network:\n{}", describe_checkpoint(&path)?);

    let cfg = TrainConfig {
        epochs: 1,
        batch_size: 100,
        ..TrainConfig::default()
    };
    snnff::trainer::train(&mut net, &train, None, &cfg, |_| {})?;
    net.save(&path)?;
    println!("after one epoch:\n{}", describe_checkpoint(&path)?);
    Ok(())
}
