//! Seeded, named random streams.
//!
//! All randomness in the crate flows from one root seed through named
//! streams, so adding a consumer never perturbs another consumer's draws.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a generator for `(root_seed, name)`. Identical inputs give
/// bit-identical streams; distinct names give independent streams.
pub fn stream(root_seed: u64, name: &str) -> Stream {
    let mut seed = [0u8; 32];
    let a = fnv1a(name.as_bytes());
    let b = fnv1a(&root_seed.to_le_bytes());
    // splitmix-style mixing of the two halves
    let mut x = a ^ b.rotate_left(31);
    for chunk in seed.chunks_mut(8) {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Derive a generator for `(root_seed, name, index)`, for per-seed or
/// per-candidate sub-streams.
pub fn substream(root_seed: u64, name: &str, index: u64) -> Stream {
    stream(root_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15), name)
}

/// Sample a Poisson variate with the given mean. Uses inversion by
/// sequential search for small means and rejection otherwise (delegated
/// to `rand_distr`), deterministic for a fixed generator state.
pub fn poisson(rate: f64, rng: &mut impl Rng) -> u64 {
    debug_assert!(rate.is_finite() && rate >= 0.0);
    if rate <= 0.0 {
        return 0;
    }
    let d = rand_distr::Poisson::new(rate).expect("positive finite rate");
    rng.sample(d) as u64
}
