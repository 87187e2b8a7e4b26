//! Counter-based random values keyed by `(seed, stream, counter)`.
//!
//! Row hashing in the sketch and per-reservoir generators must be
//! reproducible no matter how rows are partitioned across threads, so every
//! value is a pure function of its key instead of the state of a shared
//! generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64 pseudo-random bits determined by `(seed, stream, counter)`.
#[inline]
pub fn keyed_u64(seed: u64, stream: u64, counter: u64) -> u64 {
    let a = splitmix64(seed ^ splitmix64(stream.wrapping_mul(GOLDEN)));
    splitmix64(a ^ counter.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn keyed_unit(seed: u64, stream: u64, counter: u64) -> f64 {
    (keyed_u64(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent ChaCha stream for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(keyed_u64(seed, stream, 0))
}

/// Derive a child seed from a parent seed and a list of labels.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .enumerate()
        .fold(seed, |acc, (i, &p)| keyed_u64(acc, i as u64 + 1, p))
}
