//! Seeded random streams.
//!
//! Every stochastic dimension of an experiment draws from its own ChaCha stream so
//! that, for example, the arrival process can be varied while the sampled tasks stay
//! fixed. A stream is identified by `(seed, purpose)`; the purpose selects the
//! ChaCha stream id, so streams with the same seed never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Platform = 1,
    Workload = 2,
    Arrivals = 3,
    Pilot = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
