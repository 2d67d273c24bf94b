//! Seed derivation for reproducible Monte-Carlo streams.
//!
//! Every replicate of the experiment grid owns an independent RNG substream:
//! its seed is `base_seed XOR mix(cell coordinates, replicate index)`, so any
//! single replicate can be rerun in isolation and reproduces bit-identically
//! regardless of worker count or execution order. Stage seeds (k-means runs)
//! are derived from the replicate seed the same way.

use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates structured integer inputs.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a sequence of words into one value by chaining SplitMix64.
pub fn mix(words: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3; // arbitrary nonzero start
    for &w in words {
        acc = splitmix64(acc ^ w);
    }
    acc
}

/// Seed for replicate `replicate` of the grid cell `(variables, factors, k)`.
pub fn replicate_seed(
    base_seed: u64,
    variables: usize,
    factors: usize,
    k: f64,
    replicate: usize,
) -> u64 {
    base_seed
        ^ mix(&[
            variables as u64,
            factors as u64,
            k.to_bits(),
            replicate as u64,
        ])
}

/// Seed for the k-means stage of one replicate at a given RV count.
pub fn kmeans_seed(replicate_seed: u64, rv_count: usize) -> u64 {
    replicate_seed ^ mix(&[0x6b6d_6561_6e73, rv_count as u64])
}

/// The project-wide RNG. ChaCha8 is seedable, portable across platforms, and
/// its stream depends only on the seed.
pub type Rng = ChaCha8Rng;

/// Construct the RNG for a derived seed.
pub fn rng_for(seed: u64) -> Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicate_seeds_differ_across_cells_and_replicates() {
        let a = replicate_seed(7, 300, 6, 0.5, 0);
        let b = replicate_seed(7, 300, 6, 0.5, 1);
        let c = replicate_seed(7, 300, 6, 0.6, 0);
        let d = replicate_seed(7, 100, 6, 0.5, 0);
        let e = replicate_seed(7, 300, 4, 0.5, 0);
        let all = [a, b, c, d, e];
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j], "seed collision between {i} and {j}");
            }
        }
    }

    #[test]
    fn replicate_seed_is_stable() {
        // Reruns of an archived experiment must derive the same seeds.
        assert_eq!(
            replicate_seed(0, 300, 6, 1.0, 0),
            replicate_seed(0, 300, 6, 1.0, 0)
        );
        let s1 = replicate_seed(42, 50, 4, 0.0, 17);
        let s2 = replicate_seed(42, 50, 4, 0.0, 17);
        assert_eq!(s1, s2);
    }

    #[test]
    fn kmeans_seed_differs_from_replicate_seed() {
        let rs = replicate_seed(3, 300, 6, 1.0, 5);
        assert_ne!(kmeans_seed(rs, 2), rs);
        assert_ne!(kmeans_seed(rs, 2), kmeans_seed(rs, 3));
    }
}
