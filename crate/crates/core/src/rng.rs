//! Deterministic seed derivation.
//!
//! Every random stream in a simulation is derived from a master seed and a
//! short path of integer tags (agent id, sweep point, trial index, ...). The
//! derivation is a SplitMix64 chain, so a stream depends only on its path and
//! never on the order in which other streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used across the crate.
pub mod tag {
    pub const TOPOLOGY: u64 = 0x746f_706f;
    pub const STATES: u64 = 0x7374_6174;
    pub const SCORES: u64 = 0x7363_6f72;
    pub const SCHEDULE: u64 = 0x7363_6864;
    pub const TRIAL: u64 = 0x7472_6961;
    pub const START: u64 = 0x7374_7274;
    pub const LIPSCHITZ: u64 = 0x6c69_7073;
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a master seed and a tag path into a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, path))
}
