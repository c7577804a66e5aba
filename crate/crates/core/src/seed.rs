//! Stable hashing and per-stage seed derivation.
//!
//! Every random choice in the pipeline draws from a generator seeded by
//! [`derive_seed`], so a single run seed fixes all stages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a. Stable across platforms and releases.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Seed for a named stage, e.g. `derive_seed(run_seed, "raft")`.
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut bytes = seed.to_le_bytes().to_vec();
    bytes.extend_from_slice(stage.as_bytes());
    splitmix(fnv1a(&bytes))
}

/// Seed for the `index`-th item of a stage.
pub fn derive_item_seed(seed: u64, stage: &str, index: usize) -> u64 {
    splitmix(derive_seed(seed, stage) ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn rng_for(seed: u64, stage: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stage))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
