//! The randomness source injected into every randomized operation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// ChaCha20 stream, either seeded (reproducible) or keyed from OS entropy.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: Option<u64>,
    inner: ChaCha20Rng,
}

impl RandomSource {
    pub fn seeded(seed: u64) -> Self {
        RandomSource {
            seed: Some(seed),
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn from_entropy() -> Self {
        RandomSource {
            seed: None,
            inner: ChaCha20Rng::from_entropy(),
        }
    }

    /// `Some(seed)` selects seeded mode, `None` system entropy.
    pub fn from_option(seed: Option<u64>) -> Self {
        seed.map_or_else(Self::from_entropy, Self::seeded)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_deterministic(&self) -> bool {
        self.seed.is_some()
    }

    /// Independent child stream number `index`.
    ///
    /// Seeded sources derive `seed + index`; entropy sources draw a fresh key.
    pub fn split(&self, index: u64) -> RandomSource {
        match self.seed {
            Some(s) => RandomSource::seeded(s.wrapping_add(index)),
            None => RandomSource::from_entropy(),
        }
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
