//! Counter-based sub-seeds.
//!
//! Every random stream in a sweep is keyed by a tuple of small integers
//! (a stream tag followed by trial coordinates). The tuple is folded into the
//! master seed with the SplitMix64 finalizer, one word at a time:
//!
//! ```text
//! s ← mix(master ⊕ TAG)
//! for w in words: s ← mix(s ⊕ w + GOLDEN)
//! ```
//!
//! and the result seeds a `ChaCha8Rng`. Any single trial can therefore be
//! replayed without running the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tags.
pub const CHANNEL_STREAM: u64 = 1;
pub const BLOCK_STREAM: u64 = 2;
pub const VERIFY_STREAM: u64 = 3;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `master` under stream `tag`.
pub fn derive(master: u64, tag: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix(master ^ tag.wrapping_mul(GOLDEN)), |s, &w| mix(s ^ w.wrapping_add(GOLDEN)))
}

/// Generator for channel realization `channel`; shared by all SNR points and schemes.
pub fn channel_rng(master: u64, channel: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, CHANNEL_STREAM, &[channel as u64]))
}

/// Generator for the data and noise of one block.
pub fn block_rng(master: u64, channel: usize, block: usize, snr_index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(
        master,
        BLOCK_STREAM,
        &[channel as u64, block as u64, snr_index as u64],
    ))
}
