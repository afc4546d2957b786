//! IDX files (big-endian dimensions) and threshold binarization.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::machine::BitSample;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Row-major grayscale images, one byte per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl GrayImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.pixels.len().checked_div(self.pixels_per_image()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or(Error::Truncated(what))
}

pub fn read_idx_images(bytes: &[u8]) -> Result<GrayImages> {
    if be_u32(bytes, 0, "idx image header")? != IMAGES_MAGIC {
        return Err(Error::BadMagic("idx image file"));
    }
    let count = be_u32(bytes, 4, "idx image header")? as usize;
    let rows = be_u32(bytes, 8, "idx image header")? as usize;
    let cols = be_u32(bytes, 12, "idx image header")? as usize;
    let expected = count * rows * cols;
    let body = &bytes[16..];
    if body.len() < expected {
        return Err(Error::Truncated("idx image data"));
    }
    Ok(GrayImages {
        rows,
        cols,
        pixels: body[..expected].to_vec(),
    })
}

pub fn read_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    if be_u32(bytes, 0, "idx label header")? != LABELS_MAGIC {
        return Err(Error::BadMagic("idx label file"));
    }
    let count = be_u32(bytes, 4, "idx label header")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(Error::Truncated("idx label data"));
    }
    Ok(body[..count].to_vec())
}

pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<(GrayImages, Vec<u8>)> {
    let images = read_idx_images(&fs::read(images_path)?)?;
    let labels = read_idx_labels(&fs::read(labels_path)?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok((images, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarizeConfig {
    /// Pixels strictly above this become 1.
    pub threshold: u8,
}

impl Default for BinarizeConfig {
    fn default() -> Self {
        Self { threshold: 75 }
    }
}

pub fn binarize(raw: &GrayImages, cfg: BinarizeConfig) -> Vec<BitSample> {
    (0..raw.len())
        .map(|i| {
            let bits: Vec<bool> = raw.image(i).iter().map(|&p| p > cfg.threshold).collect();
            BitSample::from_bools(&bits)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_file(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        for v in [IMAGES_MAGIC, count, rows, cols] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(pixels);
        out
    }

    fn label_file(labels: &[u8]) -> Vec<u8> {
        let mut out = LABELS_MAGIC.to_be_bytes().to_vec();
        out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        out.extend_from_slice(labels);
        out
    }

    fn gray(pixels: &[u8]) -> GrayImages {
        GrayImages {
            rows: 1,
            cols: pixels.len(),
            pixels: pixels.to_vec(),
        }
    }

    #[test]
    fn threshold_rule() {
        let bits = binarize(&gray(&[75, 76, 0, 255]), BinarizeConfig::default());
        assert_eq!(bits[0].to_bools(), vec![false, true, false, true]);
        let none = binarize(&gray(&[0, 128, 255]), BinarizeConfig { threshold: 255 });
        assert_eq!(none[0].count_ones(), 0);
    }

    #[test]
    fn binarize_idempotent_on_binary_images() {
        let bits = binarize(&gray(&[0, 255, 255, 0]), BinarizeConfig { threshold: 0 });
        let back: Vec<u8> = bits[0].iter().map(|b| if b { 255 } else { 0 }).collect();
        assert_eq!(binarize(&gray(&back), BinarizeConfig { threshold: 0 }), bits);
    }

    #[test]
    fn parse_images_and_labels() {
        let imgs = read_idx_images(&image_file(2, 2, 2, &[1, 2, 3, 4, 5, 6, 7, 8])).unwrap();
        assert_eq!((imgs.len(), imgs.rows, imgs.cols), (2, 2, 2));
        assert_eq!(imgs.image(1), &[5, 6, 7, 8]);
        assert_eq!(read_idx_labels(&label_file(&[3, 9])).unwrap(), vec![3, 9]);
    }

    #[test]
    fn distinct_errors() {
        let mut wrong = image_file(1, 1, 2, &[0, 0]);
        wrong[3] = 0x01;
        assert!(matches!(read_idx_images(&wrong), Err(Error::BadMagic(_))));
        assert!(matches!(
            read_idx_images(&image_file(2, 1, 2, &[0, 0, 0])),
            Err(Error::Truncated(_))
        ));
        assert!(matches!(read_idx_labels(&[0, 0, 8]), Err(Error::Truncated(_))));

        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
        fs::write(&ip, image_file(2, 1, 1, &[0, 1])).unwrap();
        fs::write(&lp, label_file(&[1, 1, 0])).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::CountMismatch { images: 2, labels: 3 })
        ));
    }
}
