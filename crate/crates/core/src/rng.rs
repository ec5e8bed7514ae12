//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by
//! `(seed, domain)` and selected by a 64-bit stream index, so trial `t` always
//! sees the same numbers no matter which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep unrelated consumers of one seed apart.
pub mod domain {
    pub const CODEBOOK: u64 = 0x636f_6465;
    pub const TRIAL: u64 = 0x7472_6961;
    pub const CENTERS: u64 = 0x6365_6e74;
    pub const ATTACK: u64 = 0x6174_7461;
    pub const COVERING: u64 = 0x636f_7665;
    pub const TYPICALITY: u64 = 0x7479_7069;
}

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
