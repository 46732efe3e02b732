//! Recurrent LIF layers on a two-class spike-timing task stored as BSE1 files.
//!
//! Both classes fire each channel about once, so mostly spike timing separates
//! them. The same setup is trained with and without recurrent weights.
//!
//!     cargo run --release --example temporal_recurrent

use snnff::config::ExperimentConfig;
use snnff::experiment;

fn main() -> snnff::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let dir = std::env::temp_dir().join("snnff-temporal");
    experiment::make_fixtures(&dir, 0)?;
    let dataset = format!("bse:{}", dir.join("bse/temporal.bse").display());

    for recurrent in [true, false] {
        let cfg = ExperimentConfig {
            dataset: dataset.clone(),
            hidden: vec![64, 64],
            recurrent,
            learnable_decay: false,
            threshold: 1.0,
            decay: 0.9,
            epochs: 50,
            batch_size: 100,
            lr: 0.003,
            eval_every: 10,
            input_dim: 20,
            num_classes: 2,
            out_dir: dir
                .join(if recurrent {
                    "run-recurrent"
                } else {
                    "run-feedforward"
                })
                .display()
                .to_string(),
            ..ExperimentConfig::preset("shd")?
        };
        let s = experiment::run_train(&cfg)?;
        println!(
            "{:<12} test accuracy {:.4}  ({:.0} s)",
            if recurrent {
                "recurrent"
            } else {
                "feedforward"
            },
            s.final_test_accuracy.unwrap_or(f64::NAN),
            s.seconds
        );
    }
    Ok(())
}
