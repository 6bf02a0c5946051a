use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies the random streams of one trajectory.
///
/// Streams are ChaCha8 generators keyed by `(master_seed, purpose)` with the
/// trajectory index as the ChaCha stream id, so distinct pairs never share
/// key stream and results do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trajectory_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trajectory_index: u64) -> Self {
        Self {
            master_seed,
            trajectory_index,
        }
    }

    /// Generator for stream `purpose` (e.g. one per measurement channel).
    pub fn rng(&self, purpose: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&purpose.to_le_bytes());
        key[16..24].copy_from_slice(b"machclk\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trajectory_index);
        rng
    }
}

/// Stream used for jump selection, hidden paths and initial-state sampling.
pub(crate) const EVENT_STREAM: u64 = 0;

/// Stream of measurement channel `k`.
pub(crate) fn channel_stream(k: usize) -> u64 {
    1 + k as u64
}
