//! Deterministic seed derivation.

/// Derives an independent 64-bit seed from a parent seed, a stream tag and
/// an index (SplitMix64 finalizer over the mixed inputs).
pub fn derive_seed(parent: u64, tag: u64, index: u64) -> u64 {
    let mut z = parent
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags so that seeds for different purposes never collide.
pub mod tags {
    pub const LEARN_EPISODE: u64 = 1;
    pub const EVAL_EPISODE: u64 = 2;
    pub const AGENT: u64 = 3;
    pub const GAME: u64 = 4;
    pub const TAU: u64 = 5;
    pub const PRETEST: u64 = 6;
    pub const EVALUATION: u64 = 7;
    pub const MATCH: u64 = 8;
    pub const ACCEPT: u64 = 9;
    pub const ROLLOUT: u64 = 10;
}
