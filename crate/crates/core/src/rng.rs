//! Deterministic random substreams.
//!
//! Every random quantity in the toolkit is drawn from a ChaCha stream whose key
//! is the master seed and whose 64-bit stream id is a mix of the task
//! coordinates (suite, n, seed index, point index, ...). ChaCha is counter
//! based, so substreams are independent of one another and of the order in
//! which worker threads pick them up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a list of task coordinates into a stream id.
pub fn stream_id(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x6a09_e667_f3bc_c908_u64, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// FNV-1a of a label, for use as a stream coordinate.
pub fn label_key(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// The substream for `keys` under `master`.
pub fn substream(master: u64, keys: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(keys));
    rng
}
