//! Seed derivation. Every random stream in the crate comes from one user
//! seed mixed with a stream identifier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, stream: &[u64]) -> u64 {
    stream.iter().fold(splitmix64(seed), |acc, &s| splitmix64(acc ^ splitmix64(s)))
}

pub fn rng(seed: u64, stream: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream))
}

// Stream tags.
pub const INIT: u64 = 1;
pub const SHUFFLE: u64 = 2;
pub const HOLDOUT: u64 = 3;
pub const KFOLD: u64 = 4;
pub const FOLD_MODEL: u64 = 5;
pub const METER: u64 = 6;
pub const NOISE: u64 = 7;
pub const FINAL_MODEL: u64 = 8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        assert_ne!(derive(1, &[SHUFFLE, 0]), derive(1, &[SHUFFLE, 1]));
        assert_ne!(derive(1, &[SHUFFLE]), derive(2, &[SHUFFLE]));
        assert_eq!(derive(9, &[METER, 3]), derive(9, &[METER, 3]));
    }
}
