//! Deterministic seeding helpers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer; used to derive independent child seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for stream `stream` of master seed `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    SimRng::seed_from_u64(mix_seed(seed, stream))
}

/// Fixed stream identifiers so different consumers of one master seed never overlap.
pub mod streams {
    pub const CHANNEL: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const PAYLOAD: u64 = 3;
    pub const PILOTS: u64 = 4;
    pub const INIT: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const DATASET: u64 = 7;
    pub const SWEEP: u64 = 8;
    pub const GENIE: u64 = 9;
    pub const DOPPLER: u64 = 10;
    pub const SNR: u64 = 11;
}
