//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! SplitMix64-style hash of `(seed, tag, index)`, so per-item streams are
//! independent of iteration order and reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed for item `index` of stream `tag` under `seed`.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(tag ^ mix64(index)))
}

pub fn rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag, index))
}

// Stream tags.
pub const TAG_TRAIN_POOL: u64 = 0x5343_454E_4550_4F4F; // scene pool
pub const TAG_TEST_SCENE: u64 = 0x5445_5354_5343_454E;
pub const TAG_VAL_ANGLE: u64 = 0x5641_4C41_4E47_4C45;
pub const TAG_TEST_ANGLE: u64 = 0x5445_5354_414E_474C;
pub const TAG_TRAIN_ANGLE: u64 = 0x5452_4E41_4E47_4C45;
pub const TAG_SHUFFLE: u64 = 0x5348_5546_464C_4521;
pub const TAG_INIT: u64 = 0x494E_4954_5041_5241;
pub const TAG_NOISE: u64 = 0x4E4F_4953_4521_2121;
pub const TAG_LAYOUT: u64 = 0x4C41_594F_5554_2121;
