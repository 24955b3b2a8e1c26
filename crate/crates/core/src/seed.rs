//! Counter-based random streams.
//!
//! Each `(master_seed, frame_index, purpose)` triple selects one ChaCha12
//! stream, so a frame's randomness never depends on which worker ran it or
//! in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub type FrameRng = ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamTag(pub u16);

impl StreamTag {
    pub const CHANNEL: StreamTag = StreamTag(1);
    pub const BITS: StreamTag = StreamTag(2);
    pub const NOISE: StreamTag = StreamTag(3);
    pub const SURROGATE: StreamTag = StreamTag(4);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedPlan {
    pub master_seed: u64,
}

/// Frame indices are packed into the upper 48 bits of the stream id.
pub const MAX_FRAME_INDEX: u64 = (1 << 48) - 1;

impl SeedPlan {
    pub fn new(master_seed: u64) -> Self {
        SeedPlan { master_seed }
    }

    pub fn derive_stream(&self, frame_index: u64, purpose: StreamTag) -> FrameRng {
        assert!(frame_index <= MAX_FRAME_INDEX, "frame index out of range");
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream((frame_index << 16) | u64::from(purpose.0));
        rng
    }
}
