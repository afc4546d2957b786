//! Teacher output distributions built from unclamped class sums.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::machine::{encode_all, BitSample, TsetlinMachine};

/// Row-stochastic `N x classes` matrix of teacher distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelMatrix {
    rows: Vec<Vec<f64>>,
    n_classes: usize,
}

const ROW_SUM_TOLERANCE: f64 = 1e-9;

impl SoftLabelMatrix {
    /// Wraps rows that are already distributions. Rows are checked for
    /// width, non-negativity and unit sum.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_classes = rows.first().map_or(0, Vec::len);
        if n_classes < 2 {
            return Err(Error::InvalidParams(format!(
                "soft labels need at least 2 classes, got {n_classes}"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_classes {
                return Err(Error::Dimension {
                    context: "soft label row",
                    expected: n_classes,
                    actual: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::NonFinite { row: i, column: j });
            }
            let total: f64 = row.iter().sum();
            // CSV round trips keep 9 significant digits
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::Corrupt(format!("soft label row {i} sums to {total}")));
            }
        }
        Ok(Self { rows, n_classes })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// CSV with a `p0,p1,...` header and 9 significant digits per entry.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((0..self.n_classes).map(|k| format!("p{k}")))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|p| format!("{p:.8e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|field| {
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Corrupt(format!("bad probability {field:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("soft label csv"));
        }
        Self::from_rows(rows)
    }
}

/// `N x classes` matrix of raw class sums, computed in parallel over samples.
pub fn class_sums_unclamped(tm: &TsetlinMachine, xs: &[BitSample]) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("class_sums_unclamped"));
    }
    let lits = encode_all(xs, tm.n_features())?;
    Ok(lits.par_iter().map(|l| tm.class_sums(l, None)).collect())
}

/// One distribution from one row of class sums: shift by the row minimum,
/// scale by the shifted maximum, exponentiate, normalise. A row whose sums
/// are all equal becomes uniform.
pub fn soft_label_row(sums: &[f64]) -> Vec<f64> {
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let span = sums.iter().map(|s| s - min).fold(0.0, f64::max);
    if span <= 0.0 {
        return vec![1.0 / sums.len() as f64; sums.len()];
    }
    let exps: Vec<f64> = sums.iter().map(|s| ((s - min) / span).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn get_soft_labels(class_sums: &[Vec<f64>]) -> Result<SoftLabelMatrix> {
    let n_classes = class_sums.first().map_or(0, Vec::len);
    if n_classes < 2 {
        return Err(Error::InvalidParams(format!(
            "soft labels need at least 2 classes, got {n_classes}"
        )));
    }
    for (i, row) in class_sums.iter().enumerate() {
        if row.len() != n_classes {
            return Err(Error::Dimension {
                context: "class sum row",
                expected: n_classes,
                actual: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { row: i, column: j });
        }
    }
    let rows: Vec<Vec<f64>> = class_sums.iter().map(|r| soft_label_row(r)).collect();
    debug_assert!(rows
        .iter()
        .all(|r| (r.iter().sum::<f64>() - 1.0).abs() < ROW_SUM_TOLERANCE));
    Ok(SoftLabelMatrix { rows, n_classes })
}

/// Raises every probability to `1/tau^2` and renormalises.
pub fn temperature_scale(p: &[f64], tau: f64) -> Vec<f64> {
    let exponent = 1.0 / (tau * tau);
    if exponent == 1.0 {
        return p.to_vec();
    }
    let powered: Vec<f64> = p.iter().map(|v| v.powf(exponent)).collect();
    let total: f64 = powered.iter().sum();
    powered.into_iter().map(|v| v / total).collect()
}
