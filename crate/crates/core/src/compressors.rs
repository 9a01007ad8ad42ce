//! Contractive compression operators with contraction-factor and payload
//! accounting.
//!
//! Every operator here satisfies E‖C(v) − v‖² ≤ (1 − α)‖v‖² with α = k/d for
//! the sparsifiers and α = 1 for the identity. Top-k keeps the k
//! largest-magnitude coordinates unchanged (ties keep the lower index, so the
//! operator is fully deterministic); rand-k keeps k uniformly chosen
//! coordinates unscaled, which meets the α = k/d contraction bound with
//! equality in expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::DenseVector;

/// Compressor descriptor. `value_bits` is the per-value transmission cost
/// used by payload accounting (default 32).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompressorKind {
    TopK { k: usize, value_bits: u32 },
    RandK { k: usize, value_bits: u32 },
    Identity { value_bits: u32 },
}

impl CompressorKind {
    pub fn top_k(k: usize) -> Self {
        CompressorKind::TopK { k, value_bits: 32 }
    }

    pub fn rand_k(k: usize) -> Self {
        CompressorKind::RandK { k, value_bits: 32 }
    }

    pub fn identity() -> Self {
        CompressorKind::Identity { value_bits: 32 }
    }

    /// Checks 1 <= k <= d for the sparsifiers.
    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            CompressorKind::TopK { k, .. } | CompressorKind::RandK { k, .. } => {
                if k == 0 {
                    Err(Error::param("compressor k must be >= 1"))
                } else if k > d {
                    Err(Error::param(format!(
                        "compressor k = {k} exceeds dimension d = {d}"
                    )))
                } else {
                    Ok(())
                }
            }
            CompressorKind::Identity { .. } => Ok(()),
        }
    }

    pub fn uses_rng(&self) -> bool {
        matches!(self, CompressorKind::RandK { .. })
    }
}

/// Applies the compressor. Top-k and identity are deterministic (the rng is
/// untouched); rand-k consumes draws from `rng`.
pub fn compress(
    kind: &CompressorKind,
    v: &DenseVector,
    rng: &mut RngStream,
) -> Result<DenseVector> {
    let d = v.dim();
    kind.validate(d)?;
    match *kind {
        CompressorKind::Identity { .. } => Ok(v.clone()),
        CompressorKind::TopK { k, .. } => {
            if k == d {
                return Ok(v.clone());
            }
            let s = v.as_slice();
            let mut idx: Vec<usize> = (0..d).collect();
            // Largest magnitude first; ties keep the lower index.
            idx.sort_unstable_by(|&a, &b| s[b].abs().total_cmp(&s[a].abs()).then(a.cmp(&b)));
            let mut out = vec![0.0; d];
            for &i in idx.iter().take(k) {
                out[i] = s[i];
            }
            DenseVector::from_vec(out)
        }
        CompressorKind::RandK { k, .. } => {
            let s = v.as_slice();
            let keep = rng.sample_without_replacement(d, k);
            let mut out = vec![0.0; d];
            for i in keep {
                out[i] = s[i];
            }
            DenseVector::from_vec(out)
        }
    }
}

/// Contraction factor α of the compressor at dimension `d`.
pub fn alpha_of(kind: &CompressorKind, d: usize) -> f64 {
    debug_assert!(d >= 1);
    match *kind {
        CompressorKind::TopK { k, .. } | CompressorKind::RandK { k, .. } => {
            debug_assert!(k >= 1 && k <= d);
            k as f64 / d as f64
        }
        CompressorKind::Identity { .. } => 1.0,
    }
}

/// Uplink payload in bits for one application at dimension `d`: sparsifiers
/// pay k·(value_bits + ⌈log₂ d⌉) (plain index encoding, no entropy coding),
/// the identity pays d·value_bits.
pub fn payload_bits(kind: &CompressorKind, d: usize) -> u64 {
    debug_assert!(d >= 1);
    let ceil_log2 = |d: usize| -> u64 {
        if d <= 1 {
            0
        } else {
            64 - ((d - 1) as u64).leading_zeros() as u64
        }
    };
    match *kind {
        CompressorKind::TopK { k, value_bits } | CompressorKind::RandK { k, value_bits } => {
            k as u64 * (value_bits as u64 + ceil_log2(d))
        }
        CompressorKind::Identity { value_bits } => d as u64 * value_bits as u64,
    }
}
