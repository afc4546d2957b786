use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exact position of a machine's random stream, enough to resume it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

/// SplitMix64 finaliser, used to derive independent seeds from a base seed.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repetition `run` of an experiment seeded with `base`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    splitmix64(base.wrapping_add(run as u64))
}

/// Seed for one role (student, teacher, ...) within a run.
pub fn role_seed(run_seed: u64, role: u64) -> u64 {
    splitmix64(run_seed ^ role.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
