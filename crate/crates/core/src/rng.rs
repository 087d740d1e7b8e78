//! Seeded randomness.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` keyed by a user
//! seed mixed with a [`Stage`] id, so a stage sees the same stream no matter
//! which other stages ran before it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

/// Pipeline stages that consume randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Synth,
    Split,
    Noise,
    Init,
    Perturb,
    Infer,
}

impl Stage {
    fn id(self) -> u64 {
        match self {
            Stage::Synth => 1,
            Stage::Split => 2,
            Stage::Noise => 3,
            Stage::Init => 4,
            Stage::Perturb => 5,
            Stage::Infer => 6,
        }
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stage_rng(seed: u64, stage: Stage) -> StageRng {
    let key = mix(seed ^ mix(stage.id()));
    ChaCha8Rng::seed_from_u64(key)
}
