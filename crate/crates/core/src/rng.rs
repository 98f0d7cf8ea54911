//! Counter-based derivation of independent random streams from one master seed.
//!
//! Every consumer asks for the stream keyed by `(stage, lane, index)`; the same
//! key always yields the same ChaCha8 stream, so results never depend on the
//! order in which users are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pipeline stage owning a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    GroundTruth = 1,
    Values = 2,
    Perturb = 3,
    Channel = 4,
    Fallback = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedTree {
    pub const fn new(master: u64) -> Self {
        Self { master }
    }

    pub const fn master(&self) -> u64 {
        self.master
    }

    /// `lane` separates consumers within a stage (mechanism, pipeline);
    /// `index` is usually the user number and selects the ChaCha stream.
    pub fn stream(&self, stage: Stage, lane: u64, index: u64) -> ChaCha8Rng {
        let mut state = self.master;
        let a = splitmix64(&mut state);
        let mut state = a ^ (stage as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        let b = splitmix64(&mut state);
        let mut state = b ^ lane.wrapping_mul(0xAEF1_7502_108E_F2D9);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}
