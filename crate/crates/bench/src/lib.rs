//! Shared fixtures for the criterion benches.

use std::f64::consts::PI;

use qentropic::{EntropyOrder, SearchConfig};

/// `n` angles spread evenly over `(0, π]`.
pub fn thetas(n: usize) -> Vec<f64> {
    (1..=n).map(|i| PI * i as f64 / n as f64).collect()
}

pub fn order(q: f64) -> EntropyOrder {
    EntropyOrder::new(q).expect("bench orders are positive")
}

/// Default search with a coarser θ grid, for benches that repeat `s_q` many times.
pub fn quick_search() -> SearchConfig {
    SearchConfig { coarse_steps: 200, ..SearchConfig::default() }
}
