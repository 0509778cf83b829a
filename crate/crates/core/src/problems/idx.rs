//! IDX image files (the MNIST container format).
//!
//! Layout: big-endian `u32` magic `0x00000803`, then big-endian `u32` image
//! count, rows and columns, then `count·rows·cols` unsigned bytes, row-major.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::manifold::Mat;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const HEADER_LEN: usize = 16;

/// Raw pixels, one flattened image per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl IdxMatrix {
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Pixels divided by 255.
    pub fn to_normalized(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j] as f64 / 255.0)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxMatrix> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let count = be_u32(bytes, 4) as usize;
    let h = be_u32(bytes, 8) as usize;
    let w = be_u32(bytes, 12) as usize;
    if h == 0 || w == 0 {
        return Err(Error::DimMismatch(format!("zero image dimension {h}x{w}")));
    }
    let cols = h * w;
    let payload = count
        .checked_mul(cols)
        .ok_or_else(|| Error::DimMismatch("image count overflows".into()))?;
    let expected = HEADER_LEN + payload;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::DimMismatch(format!(
            "{} trailing bytes after {count} images of {h}x{w}",
            bytes.len() - expected
        )));
    }
    Ok(IdxMatrix {
        rows: count,
        cols,
        data: bytes[HEADER_LEN..].to_vec(),
    })
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxMatrix> {
    parse_idx(&std::fs::read(path)?)
}

/// Scales pixels to `[0, 1]`, shuffles rows and deals them into `n` equal
/// blocks. Remainder rows are dropped.
pub fn normalize_and_split<R: Rng + ?Sized>(images: &IdxMatrix, n: usize, r: usize, rng: &mut R) -> Result<Dataset> {
    let per = images.rows.checked_div(n).unwrap_or(0);
    if per == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} images across {n} agents",
            images.rows
        )));
    }
    if r == 0 || r > images.cols {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r <= {}, got {r}",
            images.cols
        )));
    }
    let mut order: Vec<usize> = (0..images.rows).collect();
    order.shuffle(rng);
    let blocks = order
        .chunks_exact(per)
        .take(n)
        .map(|idx| Mat::from_fn(per, images.cols, |i, j| images.row(idx[i])[j] as f64 / 255.0))
        .collect();
    Ok(Dataset {
        blocks,
        ground_truth: None,
        meta: DatasetMeta {
            n,
            rows_per_agent: vec![per; n],
            d: images.cols,
            r,
            source: "idx".into(),
        },
    })
}
