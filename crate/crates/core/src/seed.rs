//! Counter-based seed derivation. Every consumer of randomness gets its own
//! stream from `(master seed, label, index)`, so results never depend on the
//! order in which consumers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive(seed: u64, label: &str, index: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ label_hash(label));
    for &i in index {
        h = splitmix64(h ^ splitmix64(i));
    }
    h
}

pub fn rng(seed: u64, label: &str, index: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, label, index))
}
