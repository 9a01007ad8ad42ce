//! Reproducible randomness.
//!
//! All randomness flows through [`RngStream`], a ChaCha12 stream pinned to a
//! 64-bit seed. Every transform from raw stream output to floats is written
//! out explicitly here (no distribution crates), so trajectories are
//! bit-identical across platforms and releases:
//!
//! * seed expansion: four successive splitmix64 outputs form the 32-byte key;
//! * uniforms: top 53 bits of a u64, scaled by 2^-53;
//! * gaussians: Box-Muller on two uniforms, cosine branch only;
//! * bounded integers: rejection sampling on u64 draws.
//!
//! Streams are single-owner. Parallel callers derive independent child
//! streams from the parent seed and a stable tag path via [`RngStream::child`].

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

const TWO_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random stream: identical seed and draw sequence give
/// identical outputs.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    core: ChaCha12Rng,
}

/// Creates a stream from a 64-bit seed (zero is a legal seed).
pub fn seeded_rng(seed: u64) -> RngStream {
    RngStream::new(seed)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        RngStream {
            seed,
            core: ChaCha12Rng::from_seed(key),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream from the parent *seed* (not the
    /// stream state) and a stable tag path. Children with different paths are
    /// independent; re-deriving the same path yields the same stream.
    pub fn child(&self, tags: &[u64]) -> RngStream {
        let mut s = self.seed;
        for &t in tags {
            s = splitmix64(s.wrapping_add(splitmix64(t)));
        }
        RngStream::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_NEG_53
    }

    /// Uniform in (0, 1] (safe as a log argument).
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_NEG_53
    }

    /// One N(mean, std^2) draw via Box-Muller (two uniforms per draw, the
    /// sine branch is discarded to keep the draw count fixed).
    pub fn gaussian(&mut self, mean: f64, std: f64) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        mean + std * z
    }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    pub fn index(&mut self, bound: usize) -> usize {
        debug_assert!(bound >= 1);
        let bound = bound as u64;
        let zone = (u64::MAX / bound) * bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % bound) as usize;
            }
        }
    }

    /// `k` distinct indices sampled uniformly from 0..n (partial
    /// Fisher-Yates; order of the returned indices is the draw order).
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for j in 0..k {
            let r = j + self.index(n - j);
            idx.swap(j, r);
        }
        idx.truncate(k);
        idx
    }
}

/// `n` independent N(mean, std^2) draws as a vector; std = 0 yields the
/// constant vector.
pub fn sample_gaussian(rng: &mut RngStream, n: usize, mean: f64, std: f64) -> Result<DenseVector> {
    if n == 0 {
        return Err(Error::param("sample_gaussian: dimension must be >= 1"));
    }
    if std < 0.0 {
        return Err(Error::param("sample_gaussian: std must be >= 0"));
    }
    let values = (0..n).map(|_| rng.gaussian(mean, std)).collect();
    DenseVector::from_vec(values)
}
