//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit generator. Independent
//! substreams are derived from a master seed and a key path (scenario,
//! trial, robot, segment, ...) so results never depend on execution order
//! or worker count. The generator is ChaCha8.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a key path into a seed. Distinct paths give unrelated seeds.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn substream(seed: u64, keys: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, keys))
}
