//! Deterministic randomness for simulation trials.
//!
//! Every trial draws from a ChaCha8 generator keyed by `(seed, stream)`.
//! ChaCha is counter-based, so a stream's output depends only on the pair,
//! never on how many draws other streams made or on scheduling order;
//! Monte Carlo trials can run on any number of worker threads and still
//! reproduce bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for one independent stream of a seeded experiment.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` payload bits as 0/1 bytes.
pub fn random_bits(rng: &mut impl Rng, count: usize) -> Vec<u8> {
    (0..count).map(|_| rng.gen_range(0..=1u8)).collect()
}
