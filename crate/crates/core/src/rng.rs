//! Deterministic randomness. Everything seeded flows through ChaCha8, a
//! named stream cipher generator with portable, platform-independent output;
//! independent sub-streams are derived with `set_stream` so parallel work
//! (forest trees, synthetic windows) reproduces the serial result exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 generator for `(seed, stream)`: stream 0 is the main sequence,
/// nonzero streams are independent derived sequences.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
