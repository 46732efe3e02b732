use std::fs;
use std::path::Path;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Class count of the MNIST-family IDX datasets.
pub const IDX_CLASSES: usize = 10;

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                offset: self.bytes.len() as u64,
                needed: (n - (self.bytes.len() - self.pos)) as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32_be(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads an MNIST-family image/label IDX pair, scaling pixels by 1/255.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    load_idx_with_classes(images, labels, IDX_CLASSES)
}

pub fn load_idx_with_classes(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    num_classes: usize,
) -> Result<Dataset> {
    let (images, labels) = (images.as_ref(), labels.as_ref());

    let img_bytes = read(images)?;
    let mut cur = Cursor {
        path: images,
        bytes: &img_bytes,
        pos: 0,
    };
    let magic = cur.u32_be()?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format {
            path: images.to_path_buf(),
            reason: format!("image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        });
    }
    let n = cur.u32_be()? as usize;
    let h = cur.u32_be()? as usize;
    let w = cur.u32_be()? as usize;
    let d = h * w;
    let pixels = cur.take(n * d)?;

    let lbl_bytes = read(labels)?;
    let mut cur = Cursor {
        path: labels,
        bytes: &lbl_bytes,
        pos: 0,
    };
    let magic = cur.u32_be()?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format {
            path: labels.to_path_buf(),
            reason: format!("label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        });
    }
    let n_labels = cur.u32_be()? as usize;
    if n_labels != n {
        return Err(Error::Consistency {
            path: labels.to_path_buf(),
            reason: format!("{n_labels} labels for {n} images"),
        });
    }
    let raw_labels = cur.take(n)?;

    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let inputs = Matrix::from_vec(n, d, data)?;
    let labels = raw_labels.iter().map(|&l| l as usize).collect();
    Dataset::static_images(inputs, labels, num_classes)
}

/// Writes an IDX3 image file; `pixels` holds `n * rows * cols` bytes.
pub fn write_idx_images(path: impl AsRef<Path>, rows: u32, cols: u32, pixels: &[u8]) -> Result<()> {
    let per = (rows * cols) as usize;
    if per == 0 || pixels.len() % per != 0 {
        return Err(Error::Argument(format!(
            "{} pixel bytes is not a whole number of {rows}x{cols} images",
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&((pixels.len() / per) as u32).to_be_bytes());
    out.extend_from_slice(&rows.to_be_bytes());
    out.extend_from_slice(&cols.to_be_bytes());
    out.extend_from_slice(pixels);
    fs::write(path.as_ref(), out).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path.as_ref(), out).map_err(|e| Error::io(path.as_ref(), e))
}
