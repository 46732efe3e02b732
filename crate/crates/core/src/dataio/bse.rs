//! BSE1 binned-spike-event container.
//!
//! ```text
//! "BSE1"                      4 bytes
//! num_samples, T, d, c        u32 little-endian each
//! per sample:
//!   label                     u8
//!   bins                      T*d f32 little-endian, timestep-major
//! ```

use std::fs;
use std::path::Path;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const BSE_MAGIC: &[u8; 4] = b"BSE1";
const HEADER_LEN: usize = 20;

pub fn load_binned_events(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            needed: (HEADER_LEN - bytes.len()) as u64,
        });
    }
    if &bytes[..4] != BSE_MAGIC {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("magic {:?}, expected \"BSE1\"", &bytes[..4]),
        });
    }
    let field = |i: usize| {
        let o = 4 + 4 * i;
        u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize
    };
    let (n, t, d, c) = (field(0), field(1), field(2), field(3));
    if t == 0 || d == 0 || c == 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("header declares T={t}, d={d}, c={c}; all must be positive"),
        });
    }
    let record = 1 + 4 * t * d;
    let expected = HEADER_LEN + n * record;
    if bytes.len() != expected {
        return Err(Error::Consistency {
            path: path.to_path_buf(),
            reason: format!(
                "header declares {n} samples of T={t}, d={d} ({expected} bytes) but file has {} bytes",
                bytes.len()
            ),
        });
    }
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * t * d);
    for rec in bytes[HEADER_LEN..].chunks_exact(record) {
        labels.push(rec[0] as usize);
        data.extend(
            rec[1..]
                .chunks_exact(4)
                .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))),
        );
    }
    let inputs = Matrix::from_vec(n, t * d, data)?;
    Dataset::new(inputs, labels, c, d, true, t).map_err(|e| Error::Consistency {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Writes `dataset` as BSE1. Bin values are stored as `f32`.
pub fn write_binned_events(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    if dataset.num_classes > 256 {
        return Err(Error::Argument(format!(
            "BSE1 stores labels as u8; {} classes do not fit",
            dataset.num_classes
        )));
    }
    let n = dataset.len();
    let width = dataset.timesteps * dataset.input_dim;
    let mut out = Vec::with_capacity(HEADER_LEN + n * (1 + 4 * width));
    out.extend_from_slice(BSE_MAGIC);
    for v in [n, dataset.timesteps, dataset.input_dim, dataset.num_classes] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for (row, &label) in dataset.inputs.iter_rows().zip(&dataset.labels) {
        out.push(label as u8);
        for &x in row {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dataset {
        let inputs = Matrix::from_rows(&[[1.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, 0.0]]);
        Dataset::new(inputs, vec![1], 2, 4, true, 2).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bse");
        let ds = small();
        write_binned_events(&p, &ds).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 20 + 1 + 4 * 8);
        assert_eq!(load_binned_events(&p).unwrap(), ds);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bse");
        write_binned_events(&p, &small()).unwrap();
        let b = fs::read(&p).unwrap();
        assert_eq!(&b[..4], b"BSE1");
        assert_eq!(&b[4..20], &[1, 0, 0, 0, 2, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(b[20], 1);
        assert_eq!(&b[21..25], &1.0f32.to_le_bytes());
    }

    #[test]
    fn empty_sample_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.bse");
        let ds = Dataset::new(Matrix::zeros(1, 8), vec![0], 2, 4, true, 2).unwrap();
        write_binned_events(&p, &ds).unwrap();
        let back = load_binned_events(&p).unwrap();
        assert!(back.inputs.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn nmnist_shaped_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.bse");
        let ds = Dataset::new(Matrix::zeros(2, 2312 * 10), vec![3, 9], 10, 2312, true, 10).unwrap();
        write_binned_events(&p, &ds).unwrap();
        let back = load_binned_events(&p).unwrap();
        assert_eq!(
            (back.input_dim, back.timesteps, back.num_classes),
            (2312, 10, 10)
        );
    }

    #[test]
    fn bad_magic_and_bad_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bse");
        write_binned_events(&p, &small()).unwrap();
        let mut b = fs::read(&p).unwrap();
        b.pop();
        fs::write(&p, &b).unwrap();
        assert_eq!(load_binned_events(&p).unwrap_err().kind(), "consistency");
        b[3] = b'2';
        fs::write(&p, &b).unwrap();
        assert_eq!(load_binned_events(&p).unwrap_err().kind(), "format");
    }
}
