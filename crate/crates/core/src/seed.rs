//! Deterministic seed derivation.
//!
//! Every random stream in a run is keyed by a 64-bit seed folded from the
//! global seed and the coordinates of the draw (object, epoch, replicate...).
//! The fold is SplitMix64 applied word by word, so it is stable across
//! platforms and crate versions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed domains keep training, test and augmentation streams disjoint.
pub mod domain {
    pub const TEST: u64 = 0x7465_7374;
    pub const REFERENCE: u64 = 0x7265_6665;
    pub const AUGMENT: u64 = 0x6175_676d;
    pub const CORPUS: u64 = 0x636f_7270;
    pub const PLANE: u64 = 0x706c_616e;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
