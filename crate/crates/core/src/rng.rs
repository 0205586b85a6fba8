//! Deterministic substream layout.
//!
//! Every random quantity is drawn from a ChaCha8 stream. The 256-bit key holds
//! the master seed as little-endian bytes 0..8 (remaining bytes zero); the
//! 64-bit ChaCha stream id is
//!
//! ```text
//! a  = fmix64(master ^ (tag + 1) * 0x9E3779B97F4A7C15)
//! id = fmix64(a ^ index * 0xD1B54A32D192ED03)
//! ```
//!
//! with wrapping arithmetic and `fmix64` the SplitMix64 finalizer. The block
//! counter starts at zero. Any implementation of ChaCha8 plus these two lines
//! reproduces the stream layout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which consumer a substream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    Paths = 1,
    Cloud = 2,
    CloudExtra = 3,
    Annealed = 4,
    Tests = 99,
}

pub fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_id(master: u64, tag: StreamTag, index: u64) -> u64 {
    let a = fmix64(master ^ (tag as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    fmix64(a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream(master: u64, tag: StreamTag, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream_id(master, tag, index));
    rng
}
