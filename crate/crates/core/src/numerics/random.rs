use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Identity of a random stream: two streams with the same identity produce
/// the same sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub substream_index: u64,
}

/// Keyed source of standard normal draws for one sample path.
///
/// The generator is ChaCha8 keyed by `master_seed` with `substream_index`
/// selecting the ChaCha stream, so each path's sequence depends only on its
/// own identity and never on scheduling.
#[derive(Debug, Clone)]
pub struct RandomStream {
    id: StreamId,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(substream_index);
        Self { id: StreamId { master_seed, substream_index }, rng }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    pub fn next_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.gen()
    }
}
