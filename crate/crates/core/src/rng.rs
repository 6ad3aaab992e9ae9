//! Counter-based random substreams.
//!
//! Every replication draws from its own ChaCha8 stream addressed by
//! `(master seed, experiment point, replication index)`, so results depend only
//! on those coordinates and never on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type LabRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    master: u64,
}

impl Substreams {
    pub fn new(master: u64) -> Self {
        Substreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for replication `rep` of experiment point `point`.
    pub fn stream(&self, point: u64, rep: u64) -> LabRng {
        let key = splitmix64(self.master ^ splitmix64(point.wrapping_add(0x5151_5151)));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(rep);
        rng
    }
}

/// Single generator from a seed, for one-off simulations.
pub fn seeded(seed: u64) -> LabRng {
    Substreams::new(seed).stream(0, 0)
}
