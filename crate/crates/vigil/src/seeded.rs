//! Deterministic random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream keyed by
//! `(seed, domain tag, id, day)`. Streams are independent of evaluation
//! order, so per-agent work can run in parallel without changing output.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Stable across platforms and releases; used for
/// stream key derivation and the trial arm hash.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Domain separation tags for the stream keys.
#[derive(Clone, Copy, Debug)]
pub enum StreamKind {
    Population,
    AgentDay,
    Backbone,
    ModelInit,
    NegativeSampling,
}

impl StreamKind {
    fn tag(self) -> u64 {
        match self {
            StreamKind::Population => 0x706f_7075,
            StreamKind::AgentDay => 0x6461_696c,
            StreamKind::Backbone => 0x6261_636b,
            StreamKind::ModelInit => 0x6d6f_6465,
            StreamKind::NegativeSampling => 0x6e65_6773,
        }
    }
}

/// ChaCha8 stream keyed by `(seed, kind, a, b)`.
pub fn stream(seed: u64, kind: StreamKind, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&splitmix64(seed ^ kind.tag()).to_le_bytes());
    key[8..16].copy_from_slice(&splitmix64(a.wrapping_add(0x517c_c1b7_2722_0a95)).to_le_bytes());
    key[16..24].copy_from_slice(&splitmix64(b.wrapping_add(0x2545_f491_4f6c_dd1d)).to_le_bytes());
    key[24..32].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
