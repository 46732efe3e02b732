//! Small generated datasets for smoke tests and examples.

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

pub const GENERATORS: &[&str] = &["blobs", "temporal"];

pub const BLOBS_DIM: usize = 12;
pub const TEMPORAL_DIM: usize = 20;
pub const TEMPORAL_STEPS: usize = 10;

/// Builds the (train, test) pair for a named generator.
pub fn generate(name: &str, seed: u64) -> Result<(Dataset, Dataset)> {
    let root = RngStream::new(seed);
    match name {
        "blobs" => Ok((
            gaussian_blobs(1000, &mut root.fork(100)),
            gaussian_blobs(200, &mut root.fork(101)),
        )),
        "temporal" => Ok((
            temporal_patterns(2000, &mut root.fork(100)),
            temporal_patterns(500, &mut root.fork(101)),
        )),
        other => Err(Error::Argument(format!(
            "unknown synthetic generator {other:?}"
        ))),
    }
}

/// Two Gaussian blobs in 12 dimensions, 2 classes, values clipped to `[0, 1]`.
///
/// The first two entries are left at zero: label embedding overwrites them.
/// Class `k` has mean 0.75 on features whose index parity equals `k` and 0.25 elsewhere.
pub fn gaussian_blobs(n: usize, rng: &mut RngStream) -> Dataset {
    let mut data = Vec::with_capacity(n * BLOBS_DIM);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.below(2);
        labels.push(k);
        data.extend_from_slice(&[0.0, 0.0]);
        for i in 2..BLOBS_DIM {
            let mean = if i % 2 == k { 0.75 } else { 0.25 };
            data.push(rng.normal(mean, 0.1).clamp(0.0, 1.0));
        }
    }
    Dataset::static_images(Matrix::from_vec(n, BLOBS_DIM, data).unwrap(), labels, 2).unwrap()
}

/// Two-class spike-timing task, d = 20, T = 10.
///
/// Channels 2..20 each fire one spike. For class 0 the firing time sweeps forward
/// across channels, for class 1 it sweeps backward, so the per-channel spike totals
/// are identical between classes and only timing separates them. Each spike is
/// jittered by one step with probability 0.2, dropped with probability 0.1, and
/// background spikes appear with probability 0.02 per bin.
pub fn temporal_patterns(n: usize, rng: &mut RngStream) -> Dataset {
    let (d, steps) = (TEMPORAL_DIM, TEMPORAL_STEPS);
    let active = d - 2;
    let mut inputs = Matrix::zeros(n, steps * d);
    let mut labels = Vec::with_capacity(n);
    for s in 0..n {
        let k = rng.below(2);
        labels.push(k);
        let row = inputs.row_mut(s);
        for j in 0..active {
            let forward = j * steps / active;
            let mut t = if k == 0 { forward } else { steps - 1 - forward } as i64;
            if rng.next_f64() < 0.2 {
                t += if rng.next_f64() < 0.5 { -1 } else { 1 };
            }
            let t = t.clamp(0, steps as i64 - 1) as usize;
            if rng.next_f64() >= 0.1 {
                row[t * d + 2 + j] = 1.0;
            }
        }
        for t in 0..steps {
            for ch in 2..d {
                if rng.next_f64() < 0.02 {
                    row[t * d + ch] += 1.0;
                }
            }
        }
    }
    Dataset::new(inputs, labels, 2, d, true, steps).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_shape_and_range() {
        let ds = gaussian_blobs(50, &mut RngStream::new(1));
        assert_eq!(ds.inputs.shape(), (50, 12));
        assert!(ds.inputs.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(ds.labels.iter().any(|&l| l == 0) && ds.labels.iter().any(|&l| l == 1));
    }

    #[test]
    fn temporal_totals_do_not_reveal_class() {
        let ds = temporal_patterns(400, &mut RngStream::new(2));
        assert_eq!((ds.timesteps, ds.input_dim), (10, 20));
        // average spikes per channel, collapsed over time, nearly equal across classes
        let mut totals = [[0.0; 20]; 2];
        let mut counts = [0.0; 2];
        for (row, &k) in ds.inputs.iter_rows().zip(&ds.labels) {
            counts[k] += 1.0;
            for t in 0..10 {
                for ch in 0..20 {
                    totals[k][ch] += row[t * 20 + ch];
                }
            }
        }
        for ch in 2..20 {
            let a = totals[0][ch] / counts[0];
            let b = totals[1][ch] / counts[1];
            assert!((a - b).abs() < 0.15, "channel {ch}: {a} vs {b}");
        }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(
            generate("temporal", 9).unwrap(),
            generate("temporal", 9).unwrap()
        );
    }
}
