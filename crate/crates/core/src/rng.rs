//! Deterministic RNG streams.
//!
//! Every randomized routine derives its stream from a base seed plus a
//! structural tag (typically a cube key), so results do not depend on
//! worker scheduling or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche for combining tags.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed`, one mix per tag.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut s = mix(seed ^ 0x6d65_7472_6963_6466); // "metricdf"
    for &t in tags {
        s = mix(s ^ t);
    }
    s
}

/// Deterministic stream for (seed, tags).
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_tag_sensitive() {
        let mut a = stream(7, &[1, 2]);
        let mut b = stream(7, &[1, 2]);
        let mut c = stream(7, &[2, 1]);
        let xa: u64 = a.gen();
        let xb: u64 = b.gen();
        let xc: u64 = c.gen();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }
}
