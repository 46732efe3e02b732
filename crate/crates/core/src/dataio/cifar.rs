use std::fs;
use std::path::Path;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const RECORD: usize = 1 + 3 * 32 * 32;

fn load_batches(dir: &Path, names: &[&str]) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for name in names {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() % RECORD != 0 {
            return Err(Error::Truncated {
                path,
                offset: bytes.len() as u64,
                needed: (RECORD - bytes.len() % RECORD) as u64,
            });
        }
        for rec in bytes.chunks_exact(RECORD) {
            labels.push(rec[0] as usize);
            data.extend(rec[1..].iter().map(|&p| f64::from(p) / 255.0));
        }
    }
    let inputs = Matrix::from_vec(labels.len(), RECORD - 1, data)?;
    Dataset::static_images(inputs, labels, 10)
}

/// Loads the CIFAR-10 binary distribution from `dir`, flattening each
/// 3x32x32 image (channel-major, as stored) to 3072 values in `[0, 1]`.
pub fn load_cifar10(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train = load_batches(
        dir,
        &[
            "data_batch_1.bin",
            "data_batch_2.bin",
            "data_batch_3.bin",
            "data_batch_4.bin",
            "data_batch_5.bin",
        ],
    )?;
    let test = load_batches(dir, &["test_batch.bin"])?;
    Ok((train, test))
}
