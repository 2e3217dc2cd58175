//! Keyed random streams.
//!
//! Every randomized step (a permutation, a bootstrap draw, a training
//! shuffle) gets its own generator derived from the user seed and the
//! coordinates of that step, so results never depend on evaluation order
//! or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the stream identified by `seed` and `keys`.
pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for &k in keys {
        state = splitmix64(state ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    ChaCha8Rng::seed_from_u64(state)
}

// Domain tags keep streams of different subsystems apart.
pub(crate) const TAG_PERMUTATION: u64 = 0x5045_524D;
pub(crate) const TAG_BOOTSTRAP: u64 = 0x424F_4F54;
pub(crate) const TAG_TRAIN: u64 = 0x5452_4149;
pub(crate) const TAG_SUBSAMPLE: u64 = 0x5355_4253;
