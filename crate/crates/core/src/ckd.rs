//! Clause-output features and Probabilistic Clause Downsampling.
//!
//! A trained teacher maps each sample to the outputs of all its clauses,
//! class-major: columns `k*|C| .. (k+1)*|C|` hold class `k`'s clauses. A
//! smaller machine is then trained on that feature space. Columns that are
//! nearly constant over the training rows can be pruned with a projection
//! fitted once on the training matrix and reused unchanged on test data.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::machine::{encode_all, BitSample, EvalMode, LiteralVector, TsetlinMachine};

const MATRIX_MAGIC: &[u8; 4] = b"TMCO";

/// Binary `rows x width` matrix, each row stored as a packed [`BitSample`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseOutputMatrix {
    rows: Vec<BitSample>,
    width: usize,
}

impl ClauseOutputMatrix {
    pub fn from_rows(rows: Vec<BitSample>, width: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::Dimension {
                context: "clause output row",
                expected: width,
                actual: r.len(),
            });
        }
        Ok(Self { rows, width })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.width)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn rows(&self) -> &[BitSample] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitSample> {
        self.rows
    }

    /// Fraction of rows with a 1 in each column.
    pub fn column_frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.width];
        for row in &self.rows {
            for (j, c) in counts.iter_mut().enumerate() {
                if row.get(j) {
                    *c += 1;
                }
            }
        }
        let n = self.rows.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// 16-byte header (`TMCO`, row count as u64 LE, width as u32 LE), then
    /// each row as `ceil(width/8)` bytes, least significant bit first.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let width = u32::try_from(self.width)
            .map_err(|_| Error::InvalidParams("matrix too wide for u32 header".into()))?;
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&width.to_le_bytes())?;
        let row_bytes = self.width.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        for row in &self.rows {
            buf.iter_mut().for_each(|b| *b = 0);
            for j in 0..self.width {
                if row.get(j) {
                    buf[j / 8] |= 1 << (j % 8);
                }
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|_| Error::Truncated("clause output header"))?;
        if &header[..4] != MATRIX_MAGIC {
            return Err(Error::BadMagic("clause output matrix"));
        }
        let n_rows = u64::from_le_bytes(header[4..12].try_into().expect("8 bytes")) as usize;
        let width = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
        let row_bytes = width.div_ceil(8);
        let mut buf = vec![0u8; row_bytes];
        let mut rows = Vec::with_capacity(n_rows.min(1 << 20));
        for _ in 0..n_rows {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Truncated("clause output rows"))?;
            let mut row = BitSample::zeros(width);
            for j in 0..width {
                if buf[j / 8] >> (j % 8) & 1 == 1 {
                    row.set(j, true);
                }
            }
            rows.push(row);
        }
        Ok(Self { rows, width })
    }
}

/// Infer-mode outputs of every teacher clause on every sample.
pub fn clause_transform(teacher: &TsetlinMachine, xs: &[BitSample]) -> Result<ClauseOutputMatrix> {
    let lits = encode_all(xs, teacher.n_features())?;
    clause_transform_literals(teacher, &lits)
}

/// [`clause_transform`] on samples already expanded to literals.
pub fn clause_transform_literals(
    teacher: &TsetlinMachine,
    lits: &[LiteralVector],
) -> Result<ClauseOutputMatrix> {
    if let Some(l) = lits.iter().find(|l| l.n_features() != teacher.n_features()) {
        return Err(Error::Dimension {
            context: "clause_transform features",
            expected: teacher.n_features(),
            actual: l.n_features(),
        });
    }
    let n_clauses = teacher.n_clauses();
    let width = teacher.n_classes() * n_clauses;
    let rows = lits
        .par_iter()
        .map(|l| {
            let mut row = BitSample::zeros(width);
            for (k, bank) in teacher.banks().iter().enumerate() {
                for (j, clause) in bank.clauses().iter().enumerate() {
                    if clause.evaluate(l, EvalMode::Infer) {
                        row.set(k * n_clauses + j, true);
                    }
                }
            }
            row
        })
        .collect();
    Ok(ClauseOutputMatrix { rows, width })
}

/// Columns kept by downsampling, fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct PcdProjection {
    /// Retained column indices, ascending.
    pub retained: Vec<usize>,
    pub delta: f64,
    /// Activation frequency of every source column on the training rows.
    pub train_frequencies: Vec<f64>,
}

impl PcdProjection {
    pub fn source_width(&self) -> usize {
        self.train_frequencies.len()
    }

    /// Key/value CSV: `delta`, `source_width`, `retained` indices and the
    /// per-column `frequencies`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["delta".to_string(), format!("{}", self.delta)])?;
        w.write_record(["source_width".to_string(), self.source_width().to_string()])?;
        w.write_record(
            std::iter::once("retained".to_string())
                .chain(self.retained.iter().map(ToString::to_string)),
        )?;
        w.write_record(
            std::iter::once("frequencies".to_string())
                .chain(self.train_frequencies.iter().map(|p| format!("{p:.8e}"))),
        )?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut delta = None;
        let mut width = None;
        let mut retained = None;
        let mut freqs = None;
        let parse_err = |what: &str, v: &str| Error::Corrupt(format!("bad {what} value {v:?}"));
        for record in r.records() {
            let record = record?;
            let key = record.get(0).unwrap_or_default();
            let values: Vec<&str> = record.iter().skip(1).collect();
            match key {
                "delta" => {
                    let v = values.first().copied().unwrap_or_default();
                    delta = Some(v.parse::<f64>().map_err(|_| parse_err("delta", v))?);
                }
                "source_width" => {
                    let v = values.first().copied().unwrap_or_default();
                    width = Some(v.parse::<usize>().map_err(|_| parse_err("width", v))?);
                }
                "retained" => {
                    retained = Some(
                        values
                            .iter()
                            .filter(|v| !v.is_empty())
                            .map(|v| v.parse::<usize>().map_err(|_| parse_err("index", v)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                "frequencies" => {
                    freqs = Some(
                        values
                            .iter()
                            .filter(|v| !v.is_empty())
                            .map(|v| v.parse::<f64>().map_err(|_| parse_err("frequency", v)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                other => return Err(Error::Corrupt(format!("unknown projection key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Corrupt(format!("projection csv missing {k}"));
        let delta = delta.ok_or_else(|| missing("delta"))?;
        let width = width.ok_or_else(|| missing("source_width"))?;
        let retained = retained.ok_or_else(|| missing("retained"))?;
        let train_frequencies = freqs.ok_or_else(|| missing("frequencies"))?;
        if train_frequencies.len() != width {
            return Err(Error::Dimension {
                context: "projection frequencies",
                expected: width,
                actual: train_frequencies.len(),
            });
        }
        if retained.windows(2).any(|w| w[0] >= w[1]) || retained.iter().any(|&j| j >= width) {
            return Err(Error::Corrupt("retained indices must be ascending and in range".into()));
        }
        Ok(Self {
            retained,
            delta,
            train_frequencies,
        })
    }
}

/// Drops columns whose training frequency is above `1 - delta` or below
/// `delta` (strict comparisons; boundary columns stay).
pub fn fit_pcd_projection(train: &ClauseOutputMatrix, delta: f64) -> Result<PcdProjection> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParams(format!("delta must be in [0,1), got {delta}")));
    }
    if train.n_rows() == 0 || train.width() == 0 {
        return Err(Error::EmptyInput("fit_pcd_projection"));
    }
    let train_frequencies = train.column_frequencies();
    let retained = train_frequencies
        .iter()
        .enumerate()
        .filter(|&(_, &p)| !(p > 1.0 - delta || p < delta))
        .map(|(j, _)| j)
        .collect();
    Ok(PcdProjection {
        retained,
        delta,
        train_frequencies,
    })
}

pub fn apply_projection(m: &ClauseOutputMatrix, proj: &PcdProjection) -> Result<ClauseOutputMatrix> {
    if m.width() != proj.source_width() {
        return Err(Error::Dimension {
            context: "apply_projection",
            expected: proj.source_width(),
            actual: m.width(),
        });
    }
    let width = proj.retained.len();
    let rows = m
        .rows()
        .iter()
        .map(|row| {
            let mut out = BitSample::zeros(width);
            for (dst, &src) in proj.retained.iter().enumerate() {
                if row.get(src) {
                    out.set(dst, true);
                }
            }
            out
        })
        .collect();
    Ok(ClauseOutputMatrix { rows, width })
}

/// `(1/(L*C)) * ln(1/(L*C))` for `L` literals and `C` clauses.
pub fn info_measure(n_literals: usize, n_clauses: usize) -> f64 {
    let size = (n_literals.max(1) * n_clauses.max(1)) as f64;
    (1.0 / size) * (1.0 / size).ln()
}
