//! Seeded random substreams.
//!
//! Every stochastic routine draws from a [`ChaCha8Rng`] keyed by a single
//! 64-bit master seed and a 64-bit stream id. ChaCha is a counter-based
//! generator: the master seed fills the key, the stream id selects the
//! nonce, and the block counter walks through the stream. Two substreams
//! with distinct ids never overlap, and the bytes of stream `(seed, id)` do
//! not depend on how many threads consumed other streams.
//!
//! Stream ids are derived hierarchically with [`Substreams::child`], which
//! mixes a label into the parent id with SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A family of substreams hanging off one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    seed: u64,
    path: u64,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive a nested family, e.g. one per instance or per group element.
    pub fn child(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            path: splitmix64(self.path ^ splitmix64(label.wrapping_add(1))),
        }
    }

    /// Generator for stream `index` of this family.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(splitmix64(self.path ^ index));
        rng
    }
}

/// Shorthand for the root stream of a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    Substreams::new(seed).stream(0)
}
