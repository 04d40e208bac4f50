//! Shared inputs for the benchmarks.

use futureboost::data::TimeSeriesTable;
use futureboost::factors::FeatureMatrix;
use futureboost::synthgen::{generate, ScenarioSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows of `p` uniform features with a nonlinear, noisy target.
pub fn regression_data(seed: u64, n: usize, p: usize) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| 3.0 * r[0].sin() + r[1] * r[p - 1] + r.iter().skip(2).sum::<f64>() * 0.1 + rng.random_range(-0.5..0.5))
        .collect();
    let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    FeatureMatrix::from_rows(&names, &rows, &y)
}

/// Default synthetic market shortened to `days`.
pub fn market(days: usize) -> TimeSeriesTable {
    let spec = ScenarioSpec { days, ..ScenarioSpec::default() };
    generate(&spec).expect("default scenario generates")
}
