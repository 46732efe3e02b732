//! Run directories: training, evaluation, prediction, inspection and fixtures.
//!
//! A successful training run leaves in its output directory:
//!
//! - `config.toml`: the fully resolved configuration,
//! - `metrics.csv`: one row per epoch, free of wall-clock values so that seeded runs
//!   are byte-identical,
//! - `timing.csv`: seconds per epoch,
//! - `summary.json`: config echo, final and best accuracy, checkpoint path,
//! - `checkpoint.sffc`: the final network.
//!
//! A failed run leaves only `error.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dataio::{
    scale_to_unit, synthetic, write_binned_events, write_idx_images, write_idx_labels, Dataset,
    DatasetSource,
};
use crate::error::{Error, Result};
use crate::network::{describe_checkpoint, FFNetwork};
use crate::numerics::{Matrix, RngStream};
use crate::predictor;
use crate::trainer::{self, EpochMetrics};

pub const DATA_ROOT_ENV: &str = "SNNFF_DATA_ROOT";
pub const CHECKPOINT_FILE: &str = "checkpoint.sffc";
const RUN_FILES: &[&str] = &[
    "config.toml",
    "metrics.csv",
    "timing.csv",
    "summary.json",
    CHECKPOINT_FILE,
    "error.json",
];

/// Data root directory: `$SNNFF_DATA_ROOT`, or `data` relative to the working directory.
pub fn data_root() -> PathBuf {
    std::env::var_os(DATA_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Loads, scales and trims the configured dataset, checking it against the config.
pub fn load_data(cfg: &ExperimentConfig, root: &Path) -> Result<(Dataset, Dataset)> {
    let (train, test) = DatasetSource::parse(&cfg.dataset)?.load(root, cfg.seed)?;
    let mut bad = Vec::new();
    if cfg.input_dim != 0 && cfg.input_dim != train.input_dim {
        bad.push(format!(
            "input_dim: config says {}, dataset has {}",
            cfg.input_dim, train.input_dim
        ));
    }
    if cfg.num_classes != 0 && cfg.num_classes != train.num_classes {
        bad.push(format!(
            "num_classes: config says {}, dataset has {}",
            cfg.num_classes, train.num_classes
        ));
    }
    if train.temporal && train.timesteps != cfg.timesteps {
        bad.push(format!(
            "timesteps: config says {}, dataset is binned into {}",
            cfg.timesteps, train.timesteps
        ));
    }
    if !bad.is_empty() {
        return Err(Error::Config(bad));
    }
    let trim = |ds: Dataset, n: usize| {
        if n > 0 && n < ds.len() {
            ds.take(n)
        } else {
            ds
        }
    };
    Ok((
        scale_to_unit(&trim(train, cfg.train_subset)),
        scale_to_unit(&trim(test, cfg.test_subset)),
    ))
}

pub fn build_network(cfg: &ExperimentConfig, train: &Dataset) -> Result<FFNetwork> {
    let mut rng = RngStream::new(cfg.seed).fork(0);
    FFNetwork::new(
        train.input_dim,
        &cfg.hidden,
        train.num_classes,
        cfg.timesteps,
        cfg.neuron(),
        cfg.recurrent,
        &mut rng,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub epochs_run: usize,
    pub final_train_accuracy: Option<f64>,
    pub final_test_accuracy: Option<f64>,
    pub best_test_accuracy: Option<f64>,
    pub final_total_loss: Option<f64>,
    pub parameter_count: usize,
    pub checkpoint: PathBuf,
    pub seconds: f64,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

/// CSV header for a network with `layers` hidden layers.
pub fn metrics_header(layers: usize) -> String {
    let mut cols = vec!["epoch".to_string()];
    cols.extend((0..layers).map(|k| format!("loss_l{k}")));
    cols.extend(["total_loss", "train_acc", "test_acc", "lr"].map(String::from));
    cols.extend((0..layers).map(|k| format!("g_pos_l{k}")));
    cols.extend((0..layers).map(|k| format!("g_neg_l{k}")));
    cols.join(",")
}

pub fn metrics_row(m: &EpochMetrics) -> String {
    let mut cols = vec![m.epoch.to_string()];
    cols.extend(m.layer_loss.iter().map(f64::to_string));
    cols.push(m.total_loss.to_string());
    cols.push(m.train_accuracy.to_string());
    cols.push(m.test_accuracy.map_or(String::new(), |a| a.to_string()));
    cols.push(m.lr.to_string());
    cols.extend(m.mean_pos_goodness.iter().map(f64::to_string));
    cols.extend(m.mean_neg_goodness.iter().map(f64::to_string));
    cols.join(",")
}

/// Trains per `cfg` and writes the run directory. On failure the directory holds only
/// `error.json` and the error is returned.
pub fn run_train(cfg: &ExperimentConfig) -> Result<RunSummary> {
    run_train_in(cfg, &data_root())
}

pub fn run_train_in(cfg: &ExperimentConfig, root: &Path) -> Result<RunSummary> {
    let out = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    for f in RUN_FILES {
        let _ = fs::remove_file(out.join(f));
    }
    match train_into(cfg, root, &out) {
        Ok(s) => Ok(s),
        Err(e) => {
            for f in RUN_FILES {
                let _ = fs::remove_file(out.join(f));
            }
            write_error_record(&out, &e)?;
            Err(e)
        }
    }
}

pub fn write_error_record(dir: &Path, err: &Error) -> Result<()> {
    let rec = ErrorRecord {
        error: err.kind(),
        message: err.to_string(),
    };
    let path = dir.join("error.json");
    let body = serde_json::to_string_pretty(&rec).expect("error record serializes");
    fs::write(&path, body + "\n").map_err(|e| Error::io(&path, e))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn train_into(cfg: &ExperimentConfig, root: &Path, out: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    cfg.validate()?;
    let cfg_path = out.join("config.toml");
    fs::write(&cfg_path, cfg.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;

    let (train, test) = load_data(cfg, root)?;
    log::info!(
        "{}: {} train / {} test samples, d={}, c={}, T={}",
        cfg.dataset,
        train.len(),
        test.len(),
        train.input_dim,
        train.num_classes,
        cfg.timesteps
    );
    let mut net = build_network(cfg, &train)?;

    let metrics_path = out.join("metrics.csv");
    let timing_path = out.join("timing.csv");
    let mut metrics = create(&metrics_path)?;
    let mut timing = create(&timing_path)?;
    writeln!(metrics, "{}", metrics_header(cfg.hidden.len()))
        .map_err(|e| Error::io(&metrics_path, e))?;
    writeln!(timing, "epoch,seconds").map_err(|e| Error::io(&timing_path, e))?;

    let mut io_err = None;
    let history = trainer::train(&mut net, &train, Some(&test), &cfg.train_config(), |m| {
        let r = writeln!(metrics, "{}", metrics_row(m))
            .and_then(|_| writeln!(timing, "{},{}", m.epoch, m.seconds))
            .and_then(|_| metrics.flush());
        if let Err(e) = r {
            io_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_err {
        return Err(Error::io(&metrics_path, e));
    }

    let ckpt = out.join(CHECKPOINT_FILE);
    net.save(&ckpt)?;
    let last = history.last();
    let summary = RunSummary {
        config: cfg.clone(),
        epochs_run: history.len(),
        final_train_accuracy: last.map(|m| m.train_accuracy),
        final_test_accuracy: last.and_then(|m| m.test_accuracy),
        best_test_accuracy: history
            .iter()
            .filter_map(|m| m.test_accuracy)
            .fold(None, |b: Option<f64>, a| Some(b.map_or(a, |b| b.max(a)))),
        final_total_loss: last.map(|m| m.total_loss),
        parameter_count: net.parameter_count(),
        checkpoint: ckpt,
        seconds: started.elapsed().as_secs_f64(),
    };
    let sp = out.join("summary.json");
    let body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&sp, body + "\n").map_err(|e| Error::io(&sp, e))?;
    Ok(summary)
}

/// Test accuracy of a checkpoint on the configured dataset's test split.
pub fn run_eval(checkpoint: &Path, cfg: &ExperimentConfig, root: &Path) -> Result<f64> {
    let net = FFNetwork::load(checkpoint)?;
    let (_, test) = load_data(cfg, root)?;
    predictor::evaluate(&net, &test)
}

/// Writes `index,label,predicted,score_0..score_{c-1}` for every test sample.
pub fn run_predict(
    checkpoint: &Path,
    cfg: &ExperimentConfig,
    root: &Path,
    out_csv: &Path,
) -> Result<usize> {
    let net = FFNetwork::load(checkpoint)?;
    let (_, test) = load_data(cfg, root)?;
    let scores = predictor::predict(&net, &test)?;
    let mut f = create(out_csv)?;
    let mut header = "index,label,predicted".to_string();
    for y in 0..net.num_classes {
        header.push_str(&format!(",score_{y}"));
    }
    let mut body = header + "\n";
    for (i, (s, y)) in scores.iter().zip(&test.labels).enumerate() {
        body.push_str(&format!("{i},{y},{}", s.predicted));
        for v in &s.scores {
            body.push_str(&format!(",{v}"));
        }
        body.push('\n');
    }
    f.write_all(body.as_bytes())
        .map_err(|e| Error::io(out_csv, e))?;
    Ok(scores.len())
}

pub fn run_inspect(checkpoint: &Path) -> Result<String> {
    describe_checkpoint(checkpoint)
}

/// Writes the small IDX and BSE1 fixtures plus the synthetic temporal task as BSE1 files.
/// Returns the written paths.
pub fn make_fixtures(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let idx_dir = dir.join("idx");
    let bse_dir = dir.join("bse");
    for d in [&idx_dir, &bse_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut written = Vec::new();

    // two 28x28 images: a ramp and a blank
    let mut pixels = vec![0u8; 2 * 784];
    for (i, p) in pixels[..784].iter_mut().enumerate() {
        *p = (i % 256) as u8;
    }
    let images = idx_dir.join("two-images-idx3-ubyte");
    let labels = idx_dir.join("two-labels-idx1-ubyte");
    write_idx_images(&images, 28, 28, &pixels)?;
    write_idx_labels(&labels, &[7, 0])?;
    written.extend([images, labels]);

    let tiny = Dataset::new(
        Matrix::from_rows(&[[1.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, 0.0]]),
        vec![1],
        2,
        4,
        true,
        2,
    )?;
    let p = bse_dir.join("tiny.bse");
    write_binned_events(&p, &tiny)?;
    written.push(p);

    let (train, test) = synthetic::generate("temporal", seed)?;
    let tr = bse_dir.join("temporal.bse");
    let te = bse_dir.join("temporal.test.bse");
    write_binned_events(&tr, &train)?;
    write_binned_events(&te, &test)?;
    written.extend([tr, te]);
    Ok(written)
}
