//! Seeding for reproducible disorder and Monte Carlo streams.
//!
//! Every random stream is a ChaCha20 generator keyed by a 64-bit seed derived
//! from the master seed and a tuple of integer tags (model, N, realization,
//! chain, ...). Streams therefore depend only on their tags, never on the
//! order in which workers happen to request them.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier recorded in outputs for the generator and seed derivation.
pub const PRNG_ID: &str = "chacha20/splitmix64-tags/v1";

pub type Prng = ChaCha20Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a master seed with a sequence of tags into a stream seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(master), |h, &t| splitmix64(h ^ splitmix64(t)))
}

pub fn stream(seed: u64) -> Prng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_order_sensitive_and_stable() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
        // frozen so that a change to the derivation shows up as a test failure
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = stream(42).random_iter().take(8).collect();
        let b: Vec<u64> = stream(42).random_iter().take(8).collect();
        assert_eq!(a, b);
    }
}
