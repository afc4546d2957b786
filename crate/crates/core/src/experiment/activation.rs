//! Per-feature maps of what a machine's clauses include.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::machine::TsetlinMachine;

/// Signed per-feature scores in `[-1, 1]`, row-major `h x w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMap {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

/// Sums `weight * (+1 if x_f included, -1 if not x_f included)` over all
/// clauses of all classes, then divides by the largest magnitude.
pub fn activation_map(tm: &TsetlinMachine, (height, width): (usize, usize)) -> Result<ActivationMap> {
    let n = tm.n_features();
    if height * width != n {
        return Err(Error::Dimension {
            context: "activation map shape",
            expected: n,
            actual: height * width,
        });
    }
    let mut scores = vec![0.0f64; n];
    for bank in tm.banks() {
        for clause in bank.clauses() {
            let w = clause.weight();
            for (f, score) in scores.iter_mut().enumerate() {
                if clause.is_included(f) {
                    *score += w;
                }
                if clause.is_included(n + f) {
                    *score -= w;
                }
            }
        }
    }
    let max = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if max > 0.0 {
        scores.iter_mut().for_each(|s| *s /= max);
    }
    Ok(ActivationMap {
        height,
        width,
        values: scores,
    })
}

impl ActivationMap {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Binary PPM: green for positive scores, red for negative ones.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for &v in &self.values {
            let level = (v.abs() * 255.0).round() as u8;
            let (r, g) = if v >= 0.0 { (0, level) } else { (level, 0) };
            out.extend_from_slice(&[r, g, 0]);
        }
        out
    }

    /// Binary PGM with zero at mid-gray.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.values.iter().map(|&v| (127.5 + 127.5 * v).round() as u8));
        out
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::File::create(path)?.write_all(&self.to_ppm())?;
        Ok(())
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_pgm())?;
        Ok(())
    }
}
