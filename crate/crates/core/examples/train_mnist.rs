//! Desk-scale MNIST run: 784-100-100, T = 10, batch 256, lr 0.01, 15 epochs on the first
//! 10,000 training images, evaluated on the full test set.
//!
//! Expects the IDX files under `$SNNFF_DATA_ROOT/mnist` (default `data/mnist`).
//!
//!     cargo run --release --example train_mnist [out_dir]

use snnff::config::ExperimentConfig;
use snnff::experiment;

fn main() -> snnff::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "runs/mnist-desk".into());
    let cfg = ExperimentConfig {
        hidden: vec![100, 100],
        epochs: 15,
        batch_size: 256,
        lr: 0.01,
        train_subset: 10_000,
        eval_every: 5,
        out_dir: out,
        ..ExperimentConfig::preset("mnist")?
    };
    let s = experiment::run_train(&cfg)?;
    println!(
        "test accuracy {:.4} after {} epochs ({:.0} s); run directory {}",
        s.final_test_accuracy.unwrap_or(f64::NAN),
        s.epochs_run,
        s.seconds,
        cfg.out_dir
    );
    Ok(())
}
