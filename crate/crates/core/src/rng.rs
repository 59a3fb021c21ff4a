//! Seed derivation. All randomness in the crate flows from one user seed;
//! each object (field, edge, split) gets its own ChaCha8 stream seeded with
//! `derive_seed(seed, index)`, so results do not depend on evaluation order.

/// SplitMix64 finalizer applied to `seed + (index + 1) * golden gamma`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
