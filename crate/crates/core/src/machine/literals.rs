//! Packed boolean inputs and their literal expansion.
//!
//! A machine over `n` features reasons about `2n` literals: the features
//! themselves at positions `0..n` followed by their negations at `n..2n`.
//! Both vectors are stored as little-endian 64-bit words so that clause
//! evaluation can test whole words at a time.

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A vector of `n` boolean features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSample {
    words: Vec<u64>,
    len: usize,
}

impl BitSample {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut sample = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                sample.set(i, true);
            }
        }
        sample
    }

    /// Builds a sample from `0`/`1` bytes; any other value is rejected.
    pub fn from_binary_bytes(bits: &[u8]) -> Result<Self> {
        let mut sample = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => sample.set(i, true),
                other => {
                    return Err(Error::Corrupt(format!(
                        "feature {i} has value {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(sample)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// The `2n` literals of a sample: features followed by their negations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiteralVector {
    words: Vec<u64>,
    n_features: usize,
}

impl LiteralVector {
    pub fn len(&self) -> usize {
        2 * self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.n_features == 0
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        debug_assert!(k < self.len());
        (self.words[k / WORD_BITS] >> (k % WORD_BITS)) & 1 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|k| self.get(k)).collect()
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Expands a sample into its literal vector, checking it has `n_features` bits.
pub fn build_literals(x: &BitSample, n_features: usize) -> Result<LiteralVector> {
    if x.len() != n_features {
        return Err(Error::Dimension {
            context: "build_literals",
            expected: n_features,
            actual: x.len(),
        });
    }
    Ok(expand(x))
}

pub(crate) fn expand(x: &BitSample) -> LiteralVector {
    let n = x.len();
    let mut words = vec![0u64; words_for(2 * n)];
    // positive half is word-aligned with the source
    words[..x.words().len()].copy_from_slice(x.words());
    for i in 0..n {
        if !x.get(i) {
            let k = n + i;
            words[k / WORD_BITS] |= 1u64 << (k % WORD_BITS);
        }
    }
    LiteralVector {
        words,
        n_features: n,
    }
}

/// Expands every sample, failing on the first width mismatch.
pub fn encode_all(xs: &[BitSample], n_features: usize) -> Result<Vec<LiteralVector>> {
    xs.iter().map(|x| build_literals(x, n_features)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(bits: &[bool]) -> Vec<bool> {
        build_literals(&BitSample::from_bools(bits), bits.len())
            .unwrap()
            .to_bools()
    }

    #[test]
    fn negation_layout() {
        assert_eq!(lits(&[true, false]), vec![true, false, false, true]);
        assert_eq!(lits(&[false, false]), vec![false, false, true, true]);
        assert_eq!(
            lits(&[true, true, true]),
            vec![true, true, true, false, false, false]
        );
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let x = BitSample::from_bools(&[true, false, true]);
        assert!(matches!(
            build_literals(&x, 4),
            Err(Error::Dimension { expected: 4, actual: 3, .. })
        ));
    }

    #[test]
    fn wide_samples_cross_word_boundaries() {
        let bits: Vec<bool> = (0..150).map(|i| i % 3 == 0).collect();
        let l = lits(&bits);
        assert_eq!(l.len(), 300);
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(l[i], b);
            assert_eq!(l[i + 150], !b);
        }
    }

    #[test]
    fn binary_bytes_reject_other_values() {
        assert!(BitSample::from_binary_bytes(&[0, 1, 1]).is_ok());
        assert!(BitSample::from_binary_bytes(&[0, 2]).is_err());
    }
}
