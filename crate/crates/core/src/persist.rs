//! Binary model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8  "TMKD0001"
//! version      1  = 1
//! n_clauses    4  u32
//! threshold    4  u32
//! specificity  8  f64
//! weight_lr    8  f64
//! n_features   4  u32
//! n_classes    4  u32
//! s_max        1  u8 (<= 127)
//! rng_seed     8  u64
//! determin.    1  u8 (0 or 1)
//! rng seed    32  ChaCha8 key
//! rng stream   8  u64
//! rng word    16  u128
//! then per class, per clause:
//!   polarity   1  0x01 positive, 0xFF negative
//!   weight     8  f64
//!   states    2n  u8
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::machine::{polarity_of, ClassState, Polarity, StateSnapshot, TMParams, TsetlinMachine};
use crate::rng::RngState;

pub const MAGIC: &[u8; 8] = b"TMKD0001";
pub const FORMAT_VERSION: u8 = 1;
/// Largest automaton depth whose states `1..=2*s_max` fit in a byte.
pub const MAX_FILE_S_MAX: u16 = 127;

const POSITIVE: u8 = 0x01;
const NEGATIVE: u8 = 0xFF;

pub fn to_bytes(tm: &TsetlinMachine) -> Result<Vec<u8>> {
    let p = tm.params();
    if p.s_max > MAX_FILE_S_MAX {
        return Err(Error::StateOverflow(p.s_max));
    }
    let u32_field = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::InvalidParams(format!("{name} {v} exceeds u32")))
    };
    let n_literals = 2 * p.n_features;
    let mut out = Vec::with_capacity(
        110 + p.n_classes * p.n_clauses * (9 + n_literals),
    );
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&u32_field(p.n_clauses, "clause count")?.to_le_bytes());
    out.extend_from_slice(&p.threshold.to_le_bytes());
    out.extend_from_slice(&p.specificity.to_le_bytes());
    out.extend_from_slice(&p.weight_lr.to_le_bytes());
    out.extend_from_slice(&u32_field(p.n_features, "feature count")?.to_le_bytes());
    out.extend_from_slice(&u32_field(p.n_classes, "class count")?.to_le_bytes());
    out.push(p.s_max as u8);
    out.extend_from_slice(&p.rng_seed.to_le_bytes());
    out.push(u8::from(p.deterministic));

    let rng = tm.rng_state();
    out.extend_from_slice(&rng.seed);
    out.extend_from_slice(&rng.stream.to_le_bytes());
    out.extend_from_slice(&rng.word_pos.to_le_bytes());

    for bank in tm.banks() {
        for clause in bank.clauses() {
            out.push(match clause.polarity() {
                Polarity::Positive => POSITIVE,
                Polarity::Negative => NEGATIVE,
            });
            out.extend_from_slice(&clause.weight().to_le_bytes());
            out.extend(clause.states().iter().map(|&s| s as u8));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated(what))?;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::Truncated(what))?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array(what)?))
    }

    fn f64(&mut self, what: &'static str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array(what)?))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<TsetlinMachine> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(MAGIC.len(), "model header")?;
    if magic != MAGIC {
        return Err(Error::BadMagic("model file"));
    }
    let version = cur.u8("model header")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let header = "model header";
    let n_clauses = cur.u32(header)? as usize;
    let threshold = cur.u32(header)?;
    let specificity = cur.f64(header)?;
    let weight_lr = cur.f64(header)?;
    let n_features = cur.u32(header)? as usize;
    let n_classes = cur.u32(header)? as usize;
    let s_max = u16::from(cur.u8(header)?);
    if s_max > MAX_FILE_S_MAX {
        return Err(Error::StateOverflow(s_max));
    }
    let rng_seed = cur.u64(header)?;
    let deterministic = match cur.u8(header)? {
        0 => false,
        1 => true,
        other => return Err(Error::Corrupt(format!("deterministic flag {other}"))),
    };
    let params = TMParams {
        n_clauses,
        threshold,
        specificity,
        weight_lr,
        n_features,
        n_classes,
        s_max,
        rng_seed,
        deterministic,
    };
    params
        .validate()
        .map_err(|e| Error::Corrupt(format!("header parameters: {e}")))?;

    let rng = RngState {
        seed: cur.array("rng state")?,
        stream: cur.u64("rng state")?,
        word_pos: u128::from_le_bytes(cur.array("rng state")?),
    };

    let n_literals = 2 * n_features;
    let expected = n_classes
        .checked_mul(n_clauses)
        .and_then(|c| c.checked_mul(9 + n_literals))
        .ok_or(Error::Truncated("model payload"))?;
    if bytes.len() - cur.pos < expected {
        return Err(Error::Truncated("model payload"));
    }
    let mut classes = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        let mut weights = Vec::with_capacity(n_clauses);
        let mut states = Vec::with_capacity(n_clauses);
        for j in 0..n_clauses {
            let polarity = match cur.u8("model payload")? {
                POSITIVE => Polarity::Positive,
                NEGATIVE => Polarity::Negative,
                other => return Err(Error::Corrupt(format!("polarity byte {other:#04x}"))),
            };
            if polarity != polarity_of(j, n_clauses) {
                return Err(Error::Corrupt(format!("clause {j} has the wrong polarity")));
            }
            weights.push(cur.f64("model payload")?);
            states.push(
                cur.take(n_literals, "model payload")?
                    .iter()
                    .map(|&b| u16::from(b))
                    .collect(),
            );
        }
        classes.push(ClassState { weights, states });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after payload",
            bytes.len() - cur.pos
        )));
    }
    TsetlinMachine::import_state(StateSnapshot {
        params,
        rng,
        classes,
    })
    .map_err(|e| match e {
        e @ Error::Corrupt(_) => e,
        other => Error::Corrupt(other.to_string()),
    })
}

pub fn write_model<W: Write>(tm: &TsetlinMachine, mut w: W) -> Result<()> {
    w.write_all(&to_bytes(tm)?)?;
    w.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<TsetlinMachine> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

pub fn save_model(tm: &TsetlinMachine, path: impl AsRef<Path>) -> Result<()> {
    write_model(tm, BufWriter::new(File::create(path)?))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TsetlinMachine> {
    read_model(BufReader::new(File::open(path)?))
}
