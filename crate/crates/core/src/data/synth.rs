//! Noisy XOR: label `x0 ^ x1`, flipped with a fixed probability, plus
//! uniform distractor features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::machine::BitSample;

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyXorConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for NoisyXorConfig {
    fn default() -> Self {
        Self {
            n_samples: 6250,
            n_features: 12,
            noise_rate: 0.1,
            seed: 0,
        }
    }
}

/// The first 80% of the samples form the training split.
pub fn synth_noisy_xor(cfg: &NoisyXorConfig) -> Result<Dataset> {
    if cfg.n_features < 2 {
        return Err(Error::InvalidParams(format!(
            "noisy xor needs at least 2 features, got {}",
            cfg.n_features
        )));
    }
    if !(0.0..0.5).contains(&cfg.noise_rate) {
        return Err(Error::InvalidParams(format!(
            "noise rate must be in [0, 0.5), got {}",
            cfg.noise_rate
        )));
    }
    if cfg.n_samples < 2 {
        return Err(Error::InvalidParams("noisy xor needs at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut xs = Vec::with_capacity(cfg.n_samples);
    let mut ys = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let bits: Vec<bool> = (0..cfg.n_features).map(|_| rng.random()).collect();
        let clean = bits[0] ^ bits[1];
        let flip = rng.random::<f64>() < cfg.noise_rate;
        xs.push(BitSample::from_bools(&bits));
        ys.push(usize::from(clean ^ flip));
    }
    let n_train = cfg.n_samples * 4 / 5;
    let test_x = xs.split_off(n_train);
    let test_y = ys.split_off(n_train);
    Dataset::new("noisy-xor", (xs, ys), (test_x, test_y), cfg.n_features, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_labels_are_xor() {
        let ds = synth_noisy_xor(&NoisyXorConfig {
            n_samples: 500,
            noise_rate: 0.0,
            ..NoisyXorConfig::default()
        })
        .unwrap();
        for (x, &y) in ds.train_x.iter().chain(&ds.test_x).zip(ds.train_y.iter().chain(&ds.test_y)) {
            assert_eq!(y, usize::from(x.get(0) ^ x.get(1)));
        }
    }

    #[test]
    fn default_split_sizes() {
        let ds = synth_noisy_xor(&NoisyXorConfig::default()).unwrap();
        assert_eq!((ds.train_x.len(), ds.test_x.len(), ds.n_features), (5000, 1250, 12));
    }

    #[test]
    fn rule_accuracy_matches_noise() {
        let ds = synth_noisy_xor(&NoisyXorConfig {
            n_samples: 10_000,
            seed: 3,
            ..NoisyXorConfig::default()
        })
        .unwrap();
        let xs = ds.train_x.iter().chain(&ds.test_x);
        let ys = ds.train_y.iter().chain(&ds.test_y);
        let hits = xs.zip(ys).filter(|(x, &y)| usize::from(x.get(0) ^ x.get(1)) == y).count();
        let acc = hits as f64 / 10_000.0;
        assert!((acc - 0.9).abs() <= 0.02, "rule accuracy {acc}");
    }

    #[test]
    fn seeded_and_validated() {
        let cfg = NoisyXorConfig {
            n_samples: 100,
            seed: 8,
            ..NoisyXorConfig::default()
        };
        assert_eq!(synth_noisy_xor(&cfg).unwrap(), synth_noisy_xor(&cfg).unwrap());
        let other = NoisyXorConfig { seed: 9, ..cfg.clone() };
        assert_ne!(synth_noisy_xor(&cfg).unwrap(), synth_noisy_xor(&other).unwrap());
        assert!(synth_noisy_xor(&NoisyXorConfig { noise_rate: 0.5, ..cfg.clone() }).is_err());
        assert!(synth_noisy_xor(&NoisyXorConfig { n_features: 1, ..cfg }).is_err());
    }
}
