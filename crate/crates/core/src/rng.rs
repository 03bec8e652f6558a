//! Seeded randomness.
//!
//! Every stochastic routine takes an explicit 64-bit seed and builds a
//! [`ChaCha8Rng`] from it with `seed_from_u64`. Streams derived for
//! sub-tasks (chains, sample blocks, experiment trials) are obtained by
//! XOR-ing the base seed with a small tag or with [`stable_hash`] of a
//! descriptive key, so results never depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 64-bit FNV-1a over the given parts, with a 0xff separator after each part.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for part in parts {
        for &b in part.iter().chain(std::iter::once(&0xffu8)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}
