//! Fixtures shared by the criterion benches.

use weakshift_core::sampling::{seeded_rng, SetupDistribution};
use weakshift_core::MeasurementSetup;

/// Deterministic batch of random setups with `dim` fixed.
pub fn random_setups(dim: usize, count: usize, seed: u64) -> Vec<MeasurementSetup> {
    let dist = SetupDistribution {
        min_dim: dim,
        max_dim: dim,
        ..SetupDistribution::default()
    };
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}
