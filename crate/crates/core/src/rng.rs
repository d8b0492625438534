//! Deterministic random streams.
//!
//! All randomness in a run flows from one global seed. Each consumer derives
//! a named sub-stream so stages can be re-run independently while remaining
//! reproducible across platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derives a deterministic sub-stream from a global seed, a label and an index.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut h = fnv1a64(label.as_bytes());
    h = mix(h ^ seed);
    h = mix(h ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    ChaCha12Rng::seed_from_u64(h)
}

/// FNV-1a hash, also used for file checksums in run manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
