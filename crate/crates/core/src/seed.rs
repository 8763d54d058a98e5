//! Seeding. Every random draw in the crate comes from a ChaCha8 stream keyed
//! by a 64-bit seed, so results are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable mix of a sequence of words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Seed for one trial of one grid cell. Independent of every other cell.
pub fn trial_seed(base_seed: u64, ensemble_id: u64, delta_index: usize, rho_index: usize, trial: usize) -> u64 {
    mix(&[
        base_seed,
        ensemble_id,
        delta_index as u64,
        rho_index as u64,
        trial as u64,
    ])
}
