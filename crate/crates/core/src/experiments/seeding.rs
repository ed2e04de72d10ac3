//! Deterministic randomness derivation. One master seed expands into a
//! fixed cipher key; every (purpose, instance, shot) triple addresses
//! its own counter-mode stream, so results never depend on thread
//! scheduling or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Stream-purpose tags (high 16 bits of the stream id).
pub mod purpose {
    /// Circuit construction (gate draws or the global rotation).
    pub const CIRCUIT: u16 = 1;
    /// Measurement shots.
    pub const SAMPLING: u16 = 2;
    /// Reference-ensemble Monte Carlo.
    pub const REFERENCE: u16 = 3;
    /// Baseline draws (reference-vs-reference comparisons).
    pub const BASELINE: u16 = 4;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Expands the master seed into a 256-bit cipher key.
fn master_key(master: u64) -> [u8; 32] {
    let mut state = master;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// RNG for one (purpose, instance, shot) triple under a master seed.
/// Instance and shot indices are limited to 24 bits each.
pub fn derived_rng(master: u64, purpose: u16, instance: usize, shot: usize) -> Result<ChaCha12Rng> {
    if instance >= 1 << 24 {
        return Err(Error::arg(format!("instance index {instance} exceeds 24 bits")));
    }
    if shot >= 1 << 24 {
        return Err(Error::arg(format!("shot index {shot} exceeds 24 bits")));
    }
    let mut rng = ChaCha12Rng::from_seed(master_key(master));
    rng.set_stream(stream_id(purpose, instance, shot));
    Ok(rng)
}

/// The 64-bit stream id: purpose<<48 | instance<<24 | shot.
pub fn stream_id(purpose: u16, instance: usize, shot: usize) -> u64 {
    ((purpose as u64) << 48) | ((instance as u64) << 24) | shot as u64
}
