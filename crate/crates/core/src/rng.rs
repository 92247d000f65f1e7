//! Counter-keyed random streams.
//!
//! Every random quantity is drawn from a ChaCha20 stream selected by
//! `(seed, domain, stream)`. The 32-byte key is `seed` (8 bytes little-endian)
//! followed by `domain` (8 bytes little-endian) and 16 zero bytes; the ChaCha
//! stream id is `stream`, usually a replicate, chain or block index. Results
//! therefore depend only on the indices and never on how work is scheduled.
//!
//! Uniforms are `(next_u64 >> 11) · 2⁻⁵³`. Normals come in Box–Muller pairs
//! from two consecutive uniforms `u1, u2`:
//! `√(−2 ln(1−u1))·cos(2πu2)` and `√(−2 ln(1−u1))·sin(2πu2)`.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Domain tags, one per consumer, so streams never overlap.
pub mod domain {
    pub const DPP_PROBABILITY: u64 = 1;
    pub const FIGURE2: u64 = 2;
    pub const BETA_DRAWS: u64 = 3;
    pub const MCMC: u64 = 4;
    pub const DIRECTIONS: u64 = 5;
    pub const TEST_INSTANCES: u64 = 6;
}

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha20Rng,
}

impl StreamRng {
    pub fn new(seed: u64, domain: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        StreamRng { inner }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        (radius * angle.cos(), radius * angle.sin())
    }

    /// Fills `out` with standard normals, consuming whole pairs.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.normal_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.normal_pair().0;
        }
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
