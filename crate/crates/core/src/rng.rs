//! Seed plumbing. Every random decision in the crate is drawn from a named
//! sub-stream of one root seed, so modules stay reproducible independently
//! of each other and of call order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOKENIZER_MIX: &str = "tokenizer.mix";
pub const QUANT_INIT: &str = "quant.init";
pub const QUANT_DATA: &str = "quant.data";

/// Stable 64-bit id for a stream name (FNV-1a).
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sequential generator for the named sub-stream of `seed`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(name));
    rng
}

/// Counter-addressed uniform draw in `[0, 1)`.
///
/// The value depends only on `(seed, stream, counter)`, never on how many
/// other draws happened before it.
pub fn uniform_at(seed: u64, stream: u64, counter: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(counter) * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
