//! Sub-seed derivation.
//!
//! A run is identified by one master seed. Each consumer of randomness gets
//! its own ChaCha stream of that master seed, so changing how many draws one
//! consumer makes never shifts the values another one sees.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent purposes a master seed is split into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Topology = 1,
    Workload = 2,
    Users = 3,
    Simulation = 4,
}

/// Derives the 64-bit seed for `stream` from `master`.
pub fn derive(master: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream as u64);
    rng.next_u64()
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
