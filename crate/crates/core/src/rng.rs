//! Seeded random substreams.
//!
//! Every stochastic component draws from its own ChaCha stream derived from
//! the run seed, so adding draws in one component never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies the consumer of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    World = 1,
    Prices = 2,
    Profiles = 3,
    Trace = 4,
    Market = 5,
}

/// Returns the stream for `purpose`, sub-indexed by `index` (e.g. a client).
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 40) | (index & 0xff_ffff_ffff));
    rng
}
