//! Seeded substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master_seed, purpose, index)`. Replicate `i` of an experiment always sees
//! the same numbers no matter how many worker threads run or in which order
//! replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// Which part of an experiment a stream feeds. Keeps e.g. the training-set
/// draw for replicate 3 independent of the augmentation columns for
/// replicate 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Training = 1,
    Augmentation = 2,
    TestTail = 3,
    RffWeights = 4,
    Subsample = 5,
    Folds = 6,
    Direct = 7,
}

/// splitmix64 finalizer, used to spread `(seed, purpose)` over the key space.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream `index` of the family keyed by `(master, purpose)`.
pub fn substream(master: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master ^ mix(purpose as u64)));
    rng.set_stream(index);
    rng
}

/// Plain generator for single-shot operations that take a bare seed.
pub fn seeded(seed: u64) -> StreamRng {
    substream(seed, Purpose::Direct, 0)
}

#[inline]
pub fn normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
