//! The project-wide random number generator and seed derivation.
//!
//! Every sampler takes either a `&mut ProjectRng` or a `u64` seed. Trials of a
//! Monte Carlo experiment each get their own generator derived from the run
//! seed and the trial index, so results do not depend on how trials are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type ProjectRng = ChaCha8Rng;

/// Seed used by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 20_180_607;

pub fn rng_from_seed(seed: u64) -> ProjectRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; decorrelates consecutive integers.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent sub-stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn trial_rng(seed: u64, trial: u64) -> ProjectRng {
    rng_from_seed(derive_seed(seed, trial))
}

/// Runs `f` once per trial, in parallel, and returns the results in trial
/// order. Output is identical for any thread count.
pub fn par_trials<T, F>(trials: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ProjectRng) -> T + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}
