//! End-to-end training through the library API on a small generated dataset,
//! followed by a checkpoint save/load round trip.
//!
//!     cargo run --release --example train_synthetic

use snnff::dataio::synthetic;
use snnff::predictor::evaluate;
use snnff::{FFNetwork, NeuronConfig, RngStream, TrainConfig};

fn main() -> snnff::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (train, test) = synthetic::generate("blobs", 0)?;
    let mut net = FFNetwork::new(
        train.input_dim,
        &[32, 32],
        train.num_classes,
        8,
        NeuronConfig::default(),
        false,
        &mut RngStream::new(0).fork(0),
    )?;
    let cfg = TrainConfig {
        epochs: 20,
        batch_size: 50,
        lr: 0.01,
        eval_every: 5,
        ..TrainConfig::default()
    };
    snnff::trainer::train(&mut net, &train, Some(&test), &cfg, |m| {
        if let Some(acc) = m.test_accuracy {
            println!(
                "epoch {:>2}  loss {:+.4}  test accuracy {acc:.3}",
                m.epoch, m.total_loss
            );
        }
    })?;

    let path = std::env::temp_dir().join("snnff-blobs.sffc");
    net.save(&path)?;
    let restored = FFNetwork::load(&path)?;
    println!(
        "accuracy before save {:.3}, after load {:.3}",
        evaluate(&net, &test)?,
        evaluate(&restored, &test)?
    );
    Ok(())
}
