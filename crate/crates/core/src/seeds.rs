//! Deterministic random streams derived from one master seed.
//!
//! Every consumer gets a ChaCha8 generator keyed by the master seed and a
//! 64-bit stream id `(purpose << 40) | (round << 20) | trial`, so results do not
//! depend on thread scheduling or on how many draws other consumers made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    WeightRounding = 1,
    WaveformRounding = 2,
    MonteCarlo = 3,
    Evaluation = 4,
}

pub fn stream_id(purpose: Purpose, round: u64, trial: u64) -> u64 {
    debug_assert!(round < 1 << 20 && trial < 1 << 20);
    ((purpose as u64) << 40) | (round << 20) | trial
}

pub fn rng_for(master: u64, purpose: Purpose, round: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(purpose, round, trial));
    rng
}
