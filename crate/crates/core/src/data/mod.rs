//! Datasets and booleanization.

mod idx;
mod synth;
mod text;

use std::path::Path;

pub use idx::{binarize, load_idx, read_idx_images, read_idx_labels, BinarizeConfig, GrayImages};
pub use synth::{synth_noisy_xor, NoisyXorConfig};
pub use text::{booleanize_text, load_text_dir, tokenize_terms, TextVocabulary};

use crate::error::{Error, Result};
use crate::machine::BitSample;

/// Train and test splits of boolean samples with labels in `[0, n_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub train_x: Vec<BitSample>,
    pub train_y: Vec<usize>,
    pub test_x: Vec<BitSample>,
    pub test_y: Vec<usize>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        (train_x, train_y): (Vec<BitSample>, Vec<usize>),
        (test_x, test_y): (Vec<BitSample>, Vec<usize>),
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 classes, got {n_classes}")));
        }
        for (xs, ys) in [(&train_x, &train_y), (&test_x, &test_y)] {
            if xs.len() != ys.len() {
                return Err(Error::CountMismatch {
                    images: xs.len(),
                    labels: ys.len(),
                });
            }
            if let Some(x) = xs.iter().find(|x| x.len() != n_features) {
                return Err(Error::Dimension {
                    context: "dataset sample",
                    expected: n_features,
                    actual: x.len(),
                });
            }
            if let Some(&label) = ys.iter().find(|&&y| y >= n_classes) {
                return Err(Error::LabelOutOfRange { label, n_classes });
            }
        }
        if train_x.is_empty() {
            return Err(Error::EmptyInput("training split"));
        }
        Ok(Self {
            name: name.into(),
            train_x,
            train_y,
            test_x,
            test_y,
            n_features,
            n_classes,
        })
    }

    /// Keeps the first `train` and `test` samples of each split.
    pub fn truncated(mut self, train: Option<usize>, test: Option<usize>) -> Self {
        if let Some(n) = train {
            self.train_x.truncate(n.max(1));
            self.train_y.truncate(n.max(1));
        }
        if let Some(n) = test {
            self.test_x.truncate(n);
            self.test_y.truncate(n);
        }
        self
    }
}

/// Loads an MNIST-family directory holding the four standard IDX files
/// (`train-images-idx3-ubyte`, `train-labels-idx1-ubyte`, `t10k-...`).
pub fn load_mnist_dir(name: &str, dir: impl AsRef<Path>, cfg: BinarizeConfig) -> Result<Dataset> {
    let dir = dir.as_ref();
    let train = load_idx(
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
    )?;
    let test = load_idx(
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    )?;
    if train.0.pixels_per_image() != test.0.pixels_per_image() {
        return Err(Error::Dimension {
            context: "test image size",
            expected: train.0.pixels_per_image(),
            actual: test.0.pixels_per_image(),
        });
    }
    let n_features = train.0.pixels_per_image();
    let n_classes = train
        .1
        .iter()
        .chain(&test.1)
        .map(|&l| usize::from(l) + 1)
        .max()
        .unwrap_or(0)
        .max(2);
    let to_labels = |ls: Vec<u8>| ls.into_iter().map(usize::from).collect::<Vec<_>>();
    Dataset::new(
        name,
        (binarize(&train.0, cfg), to_labels(train.1)),
        (binarize(&test.0, cfg), to_labels(test.1)),
        n_features,
        n_classes,
    )
}
