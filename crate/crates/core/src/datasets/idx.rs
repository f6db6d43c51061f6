//! IDX containers as used by MNIST: a big-endian `u32` magic number, one
//! big-endian `u32` per dimension, then raw unsigned bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Standard MNIST file names: training images, training labels, test images,
/// test labels.
pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

/// Raw 0-255 images, row-major flattened, with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.rows * self.cols;
        &self.pixels[i * d..(i + 1) * d]
    }
}

/// Images scaled to `[-1, 1]`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImages {
    pub pixels: Matrix,
    pub labels: Vec<u8>,
}

impl LabeledImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn header(bytes: &[u8], path: &Path, magic: u32, dims: usize) -> Result<Vec<usize>> {
    let head = 4 * (dims + 1);
    let truncated = Error::Truncated {
        path: path.to_path_buf(),
        expected: head,
        found: bytes.len(),
    };
    let found = be_u32(bytes, 0).ok_or(truncated)?;
    if found != magic {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found,
            expected: magic,
        });
    }
    if bytes.len() < head {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: head,
            found: bytes.len(),
        });
    }
    Ok((0..dims)
        .map(|d| be_u32(bytes, 4 + 4 * d).unwrap_or_default() as usize)
        .collect())
}

fn payload<'a>(bytes: &'a [u8], path: &Path, offset: usize, len: usize) -> Result<&'a [u8]> {
    let body = &bytes[offset..];
    if body.len() < len {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: len,
            found: body.len(),
        });
    }
    Ok(&body[..len])
}

/// Returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let dims = header(bytes, path, IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let pixels = payload(bytes, path, 16, count * rows * cols)?;
    Ok((count, rows, cols, pixels.to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let dims = header(bytes, path, LABELS_MAGIC, 1)?;
    let labels = payload(bytes, path, 8, dims[0])?;
    if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
        return Err(Error::BadLabel(bad));
    }
    Ok(labels.to_vec())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
            hint: format!("expected MNIST IDX files named {}", MNIST_FILES.join(", ")),
        });
    }
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<IdxImages> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    let (count, rows, cols, pixels) = parse_idx_images(&read(images_path)?, images_path)?;
    let labels = parse_idx_labels(&read(labels_path)?, labels_path)?;
    if labels.len() != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: labels.len(),
        });
    }
    Ok(IdxImages {
        rows,
        cols,
        pixels,
        labels,
    })
}

/// `v / 127.5 - 1`, mapping 0 to -1 and 255 to 1.
pub fn normalize_pixel(v: u8) -> f64 {
    v as f64 / 127.5 - 1.0
}

pub fn normalize_pixels(raw: &IdxImages) -> LabeledImages {
    let d = raw.rows * raw.cols;
    let pixels = Matrix::from_fn(raw.len(), d, |i, j| normalize_pixel(raw.pixels[i * d + j]));
    LabeledImages {
        pixels,
        labels: raw.labels.clone(),
    }
}

/// Writes `images` as an image file and a label file.
pub fn write_idx(images: &IdxImages, images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<()> {
    let mut img = Vec::with_capacity(16 + images.pixels.len());
    img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [images.len(), images.rows, images.cols] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    img.extend_from_slice(&images.pixels);
    let mut lab = Vec::with_capacity(8 + images.labels.len());
    lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(images.len() as u32).to_be_bytes());
    lab.extend_from_slice(&images.labels);
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    fs::write(ip, img).map_err(|e| Error::io(ip, e))?;
    fs::write(lp, lab).map_err(|e| Error::io(lp, e))
}
