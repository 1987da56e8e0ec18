//! Seeded random streams.
//!
//! Every Monte Carlo trial owns the ChaCha8 stream selected by its index, keyed
//! by the experiment seed. A trial therefore sees the same numbers whichever
//! worker thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for substream `stream` of experiment `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
