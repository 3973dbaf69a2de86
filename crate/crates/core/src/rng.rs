//! Seeded randomness with documented, platform-independent stream splitting.
//!
//! Every random ingredient is drawn from a ChaCha12 stream keyed by a
//! `(seed, stream id)` pair. The key layout is fixed:
//!
//! ```text
//! bytes  0..8   seed      (little endian u64)
//! bytes  8..16  stream id (little endian u64)
//! bytes 16..24  the constant 0x6d73_7461_625f_7631 ("mstab_v1")
//! bytes 24..32  zero
//! ```
//!
//! Uniform variates are derived from raw `next_u64` output with explicit
//! integer arithmetic, so the sequences do not depend on any distribution
//! code that might change between releases. Each variate consumes exactly
//! one 64-bit word, which keeps sub-streams aligned when code is refactored.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

const KEY_TAG: u64 = 0x6d73_7461_625f_7631;

/// A deterministic sub-stream identified by `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&KEY_TAG.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// SplitMix64 finalizer; used to derive per-path seeds from a base seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the k-th member of a family (paths, repetitions, ...).
pub fn member_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

/// Seed for the `attempt`-th retry of a member, used when a degenerate
/// draw must be replaced.
pub fn retry_seed(seed: u64, index: u64, attempt: u64) -> u64 {
    splitmix64(member_seed(seed, index).wrapping_add(attempt))
}

/// Uniform on `[0, 1)` with 53-bit resolution.
pub fn uniform_co(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on the open interval `(0, 1)`; safe to pass through `ln`.
pub fn uniform_oo(rng: &mut ChaCha12Rng) -> f64 {
    (((rng.next_u64() >> 12) as f64) + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Unit-mean exponential via inverse CDF; exactly one word consumed.
pub fn exponential(rng: &mut ChaCha12Rng) -> f64 {
    -uniform_oo(rng).ln()
}

/// Fair sign in {-1, +1}; exactly one word consumed.
pub fn sign(rng: &mut ChaCha12Rng) -> f64 {
    if rng.next_u64() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}
