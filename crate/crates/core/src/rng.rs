//! Seedable random streams.
//!
//! Every stochastic component takes an injected RNG. Independent consumers
//! (client, server measurements, channel noise, Monte Carlo trials) draw from
//! distinct ChaCha streams of the same seed so runs are reproducible and
//! order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for stream `stream` of `seed`. Streams never overlap.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub mod streams {
    pub const CLIENT: u64 = 1;
    pub const SERVER: u64 = 2;
    pub const NOISE: u64 = 3;
    /// Monte Carlo trial `i` uses stream `TRIAL_BASE + i`.
    pub const TRIAL_BASE: u64 = 1 << 32;
}
