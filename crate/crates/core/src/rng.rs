//! Reproducible random streams.
//!
//! A stream is addressed by `(seed, stream_id)`. The generator is ChaCha8 in
//! counter mode: the seed fixes the key, the stream id selects the nonce and
//! the word position is the draw index, so the n-th value of a stream is a
//! pure function of `(seed, stream_id, n)` on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut core = ChaCha8Rng::seed_from_u64(seed);
        core.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            core,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.core.get_word_pos()
    }

    /// Jump to an absolute word position.
    pub fn set_word_pos(&mut self, pos: u128) {
        self.core.set_word_pos(pos);
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.core.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.core.fill_bytes(dst)
    }
}
