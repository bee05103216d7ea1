//! Seeded random streams.
//!
//! Every Monte Carlo run gets its own stream whose seed is a pure function of
//! the master seed and the run's coordinates, so results do not depend on
//! scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed. Order-sensitive.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C909, |acc, &p| mix(acc ^ mix(p)))
}

/// Sub-streams carved out of one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Channel and noise draws.
    World = 1,
    /// Swarm initialization and updates.
    Optimizer = 2,
}

pub fn substream(run_seed: u64, purpose: Purpose) -> Stream {
    stream(derive_seed(&[run_seed, purpose as u64]))
}
