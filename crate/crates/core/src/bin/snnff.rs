use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use snnff::config::ExperimentConfig;
use snnff::experiment::{self, CHECKPOINT_FILE};
use snnff::{Error, Result};

/// Forward-Forward training for spiking neural networks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and write a run directory.
    Train(RunArgs),
    /// Report test accuracy of a checkpoint.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Checkpoint to evaluate (default: <out>/checkpoint.sffc).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Write per-sample label scores and predictions as CSV.
    Predict {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Output CSV (default: <out>/predictions.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Describe a checkpoint.
    Inspect { checkpoint: PathBuf },
    /// Write IDX and BSE1 fixture files.
    MakeFixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML config file, applied over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mnist | fmnist | kmnist | cifar10 | bse:<path> | synthetic:<generator>
    #[arg(long)]
    dataset: Option<String>,
    /// mnist | fmnist | kmnist | cifar10 | nmnist | shd
    #[arg(long, default_value = "mnist")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::preset(&self.preset)?;
        if let Some(path) = &self.config {
            cfg = ExperimentConfig::load(path, &cfg)?;
        }
        if let Some(d) = &self.dataset {
            if *d != cfg.dataset {
                cfg.dataset = d.clone();
                cfg.input_dim = 0;
                cfg.num_classes = 0;
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(b) = self.batch_size {
            cfg.batch_size = b;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let root = experiment::data_root();
    match cli.command {
        Command::Train(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => {
                    if let Some(o) = &args.out {
                        std::fs::create_dir_all(o).map_err(|err| Error::Usage(err.to_string()))?;
                        experiment::write_error_record(o, &e)?;
                    }
                    return Err(e);
                }
            };
            let s = experiment::run_train_in(&cfg, &root)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&s).expect("summary serializes")
            );
        }
        Command::Eval { run, checkpoint } => {
            let cfg = run.resolve()?;
            let ckpt =
                checkpoint.unwrap_or_else(|| PathBuf::from(&cfg.out_dir).join(CHECKPOINT_FILE));
            let acc = experiment::run_eval(&ckpt, &cfg, &root)?;
            println!("test accuracy {acc}");
        }
        Command::Predict {
            run,
            checkpoint,
            csv,
        } => {
            let cfg = run.resolve()?;
            let ckpt =
                checkpoint.unwrap_or_else(|| PathBuf::from(&cfg.out_dir).join(CHECKPOINT_FILE));
            let csv = csv.unwrap_or_else(|| PathBuf::from(&cfg.out_dir).join("predictions.csv"));
            let n = experiment::run_predict(&ckpt, &cfg, &root, &csv)?;
            println!("wrote {n} predictions to {}", csv.display());
        }
        Command::Inspect { checkpoint } => print!("{}", experiment::run_inspect(&checkpoint)?),
        Command::MakeFixtures { out, seed } => {
            for p in experiment::make_fixtures(&out, seed)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let rec = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{rec}");
            ExitCode::from(1)
        }
    }
}
