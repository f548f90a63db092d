//! Seed derivation for reproducible parallel streams.
//!
//! Every independent unit of random work (a permutation, a Gaussian draw
//! block, a dataset replicate) gets its own generator keyed by
//! `(seed, domain, index)`, so results never depend on how the work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_PERMUTATION: u64 = 0x7065_726d;
pub const DOMAIN_DROP_ROW: u64 = 0x6472_6f70;
pub const DOMAIN_GAUSSIAN: u64 = 0x6761_7573;
pub const DOMAIN_DATA: u64 = 0x6461_7461;
pub const DOMAIN_REPLICATE: u64 = 0x7265_706c;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a domain tag and an index into a fresh 64-bit seed.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(domain)) ^ index)
}

/// Generator for unit `index` of `domain`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, index))
}
