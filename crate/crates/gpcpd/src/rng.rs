//! Seed derivation helpers. Every Monte-Carlo routine derives one
//! independent stream per (seed, stream, index) triple so replicates can be
//! evaluated in parallel without changing results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates consecutive seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-replicate generator.
pub fn derive_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let s = mix(seed ^ mix(stream ^ mix(index)));
    ChaCha8Rng::seed_from_u64(s)
}

/// Deterministic top-level generator for a sequential sampling pass.
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
