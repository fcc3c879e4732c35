//! Seeded, order-independent random streams.
//!
//! Every replica draws from its own ChaCha8 stream, keyed by the root seed, a
//! domain tag (which experiment is drawing) and the replica index. Replicas can
//! therefore run on any thread in any order and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags separating the streams of different experiments.
pub mod domain {
    pub const WINDOW: u64 = 0x01;
    pub const QUANTILE: u64 = 0x02;
    pub const POINT: u64 = 0x03;
    pub const BOX: u64 = 0x04;
    pub const CUTEDGE: u64 = 0x05;
    pub const DOMINANCE: u64 = 0x06;
    pub const FIREWORK: u64 = 0x07;
    pub const GOODPAIR: u64 = 0x08;
    pub const XI: u64 = 0x09;
    pub const BOOTSTRAP: u64 = 0x0a;
    pub const LEDGER: u64 = 0x0b;
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for `(root, domain, replica)`.
pub fn stream(root: u64, domain: u64, replica: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(root ^ splitmix64(domain)));
    rng.set_stream(replica);
    rng
}

/// Sub-seed derived from a root seed, used when an experiment hands a fresh
/// root to a nested sampler (for instance one seed per scale).
pub fn derive(root: u64, tag: u64) -> u64 {
    splitmix64(root ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
}
