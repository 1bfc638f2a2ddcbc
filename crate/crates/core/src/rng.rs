//! Seed plumbing. Every random decision derives from one explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type PcmRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `seed` and a stream path.
pub fn derive_seed(seed: u64, stream: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &s in stream {
        h = splitmix64(h ^ splitmix64(s.wrapping_add(0x5851_F42D_4C95_7F2D)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> PcmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// `count` distinct indices from `0..n`, returned in ascending order.
pub fn sample_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> alloc::vec::Vec<usize> {
    let count = count.min(n);
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool.sort_unstable();
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_stream() {
        assert_ne!(derive_seed(1, &[0]), derive_seed(1, &[1]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }

    #[test]
    fn sample_indices_are_distinct_and_sorted() {
        let mut rng = rng_from_seed(3);
        let idx = sample_indices(&mut rng, 50, 20);
        assert_eq!(idx.len(), 20);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}
