//! Seed splitting.
//!
//! A single user seed fans out into independent subsystem streams: the label is hashed with
//! 64-bit FNV-1a, xor-ed into the parent seed, and the result is passed through one SplitMix64
//! finalisation round. Child seeds for indexed items (instance `i` of a dataset, say) use
//! [`derive_indexed`], which hashes the index the same way.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a(label.as_bytes()))
}

pub fn derive_indexed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive(seed, label) ^ fnv1a(&index.to_le_bytes()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
