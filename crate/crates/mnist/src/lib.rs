//! Bit-exact reading and writing of the MNIST IDX files.
//!
//! Image files: big-endian `u32` magic `0x00000803`, count, rows (28), columns (28),
//! then `count·784` unsigned bytes in row-major order. Label files: magic
//! `0x00000801`, count, then `count` bytes in `0..=9`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated file: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("{extra} unexpected bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error("images are {rows}x{cols}, expected 28x28")]
    Dimensions { rows: u32, cols: u32 },
    #[error("label {0} is outside 0..=9")]
    BadLabel(u8),
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("requested {requested} samples from a set of {available}")]
    SplitTooLarge { requested: usize, available: usize },
    #[error("split size must be at least 1")]
    EmptySplit,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, Error>;

pub type Image = [u8; PIXELS];

fn header(bytes: &[u8], words: usize) -> Result<Vec<u32>> {
    if bytes.len() < 4 * words {
        return Err(Error::Truncated { needed: 4 * words, available: bytes.len() });
    }
    Ok(bytes[..4 * words].chunks_exact(4).map(|w| u32::from_be_bytes([w[0], w[1], w[2], w[3]])).collect())
}

fn payload(bytes: &[u8], start: usize, len: usize) -> Result<&[u8]> {
    let needed = start + len;
    if bytes.len() < needed {
        return Err(Error::Truncated { needed, available: bytes.len() });
    }
    if bytes.len() > needed {
        return Err(Error::TrailingBytes { extra: bytes.len() - needed });
    }
    Ok(&bytes[start..])
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    let magic = header(bytes, 1)?[0];
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic { expected: IMAGE_MAGIC, found: magic });
    }
    let h = header(bytes, 4)?;
    let (count, rows, cols) = (h[1] as usize, h[2], h[3]);
    if rows as usize != SIDE || cols as usize != SIDE {
        return Err(Error::Dimensions { rows, cols });
    }
    let data = payload(bytes, 16, count * PIXELS)?;
    Ok(data.chunks_exact(PIXELS).map(|c| c.try_into().expect("784-byte chunk")).collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = header(bytes, 1)?[0];
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic { expected: LABEL_MAGIC, found: magic });
    }
    let count = header(bytes, 2)?[1] as usize;
    let data = payload(bytes, 8, count)?;
    if let Some(&bad) = data.iter().find(|&&l| l > 9) {
        return Err(Error::BadLabel(bad));
    }
    Ok(data.to_vec())
}

pub fn write_idx_images(images: &[Image]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * PIXELS);
    for word in [IMAGE_MAGIC, images.len() as u32, SIDE as u32, SIDE as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    for image in images {
        out.extend_from_slice(image);
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Images with their digit labels. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImageSet {
    name: String,
    images: Vec<Image>,
    labels: Vec<u8>,
}

impl LabeledImageSet {
    pub fn new(name: impl Into<String>, images: Vec<Image>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::CountMismatch { images: images.len(), labels: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::BadLabel(bad));
        }
        Ok(Self { name: name.into(), images, labels })
    }

    pub fn from_idx_bytes(name: impl Into<String>, images: &[u8], labels: &[u8]) -> Result<Self> {
        Self::new(name, parse_idx_images(images)?, parse_idx_labels(labels)?)
    }

    pub fn load(name: impl Into<String>, images: &Path, labels: &Path) -> Result<Self> {
        let read = |p: &Path| fs::read(p).map_err(|source| Error::Io { path: p.to_path_buf(), source });
        Self::from_idx_bytes(name, &read(images)?, &read(labels)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Per-digit counts.
    pub fn class_counts(&self) -> [usize; 10] {
        let mut counts = [0; 10];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Uniform subsample of `size` entries without replacement, deterministic in `seed`.
    pub fn take_split(&self, size: usize, seed: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptySplit);
        }
        if size > self.len() {
            return Err(Error::SplitTooLarge { requested: size, available: self.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = sample(&mut rng, self.len(), size);
        Ok(Self {
            name: format!("{}[{size}@{seed}]", self.name),
            images: picked.iter().map(|i| self.images[i]).collect(),
            labels: picked.iter().map(|i| self.labels[i]).collect(),
        })
    }

    pub fn to_idx_bytes(&self) -> (Vec<u8>, Vec<u8>) {
        (write_idx_images(&self.images), write_idx_labels(&self.labels))
    }
}

/// The standard training (60000) and test (10000) splits under `dir`.
#[derive(Debug, Clone)]
pub struct Mnist {
    pub train: LabeledImageSet,
    pub test: LabeledImageSet,
}

impl Mnist {
    pub fn load_dir(dir: &Path) -> Result<Self> {
        Ok(Self {
            train: LabeledImageSet::load("train", &dir.join(TRAIN_IMAGES), &dir.join(TRAIN_LABELS))?,
            test: LabeledImageSet::load("test", &dir.join(TEST_IMAGES), &dir.join(TEST_LABELS))?,
        })
    }

    /// Whether all four files exist under `dir`.
    pub fn available(dir: &Path) -> bool {
        [TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS].iter().all(|f| dir.join(f).is_file())
    }
}
