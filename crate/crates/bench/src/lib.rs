//! Shared fixtures for the benchmarks.

use genus_iso::{GenusGrid, SchemaWord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded instance with a planted perfect matching.
pub fn instance(g: usize, m: usize, seed: u64, density: f64) -> GenusGrid {
    GenusGrid::from_seed(g, m, seed, density, true).expect("feasible parameters")
}

pub fn words(count: usize, labels: usize, seed: u64) -> Vec<SchemaWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SchemaWord::random(&mut rng, labels)).collect()
}
